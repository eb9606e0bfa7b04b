#pragma once

// Open-loop replay of a recorded joystick sequence at the drive-loop rate,
// optionally rewriting each command through the inverse model.

#include <filesystem>
#include <optional>
#include <vector>

#include "ikd/datalog.hpp"
#include "ikd/mlp.hpp"
#include "ikd/simcore.hpp"

namespace ikd {

struct BufferedCommand {
  double v = 0.0;
  double av = 0.0;

  friend bool operator==(const BufferedCommand&, const BufferedCommand&) = default;
};

/// Circular command list; next() returns the element under the cursor and
/// advances, wrapping from the last element to the first.
class CommandBuffer {
 public:
  CommandBuffer() = default;
  /// Throws ValidationError when `commands` is empty or holds non-finite values.
  explicit CommandBuffer(std::vector<BufferedCommand> commands);

  BufferedCommand next();

  std::size_t size() const noexcept { return commands_.size(); }
  bool empty() const noexcept { return commands_.empty(); }
  std::size_t cursor() const noexcept { return cursor_; }
  void rewind() noexcept { cursor_ = 0; }
  const std::vector<BufferedCommand>& commands() const noexcept { return commands_; }

 private:
  std::vector<BufferedCommand> commands_;
  std::size_t cursor_ = 0;
};

CommandBuffer load_buffer(const JoyLog& joy);

/// Plain text, one "v,av" pair per line.
void write_buffer_txt(const std::filesystem::path& path, const CommandBuffer& buf);
CommandBuffer read_buffer_txt(const std::filesystem::path& path);

inline constexpr double kDriveLoopRate = 20.0;

struct ReplayOptions {
  double rate = kDriveLoopRate;
  double duration = 0.0;
  /// Buffer elements consumed per tick; only the first is executed.
  std::size_t stride = 1;
  double sim_dt = kDefaultSimDt;
  double eps_v = kDefaultEpsV;
  VehicleState initial{};
};

/// Pops one command per tick, converts it to curvature, optionally corrects
/// it, and holds it over the simulator steps until the next tick.
SimTrace execute_replay(CommandBuffer& buf, const SlipParams& p,
                        const std::optional<MlpParams>& model, const ReplayOptions& opts);

/// CSV: t,x,y,heading,v,av,cmd_v,cmd_c (the last row repeats the final command).
void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace);
/// Inverse of write_trace_csv; dt is taken from the first two timestamps.
SimTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace ikd
