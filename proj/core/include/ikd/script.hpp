#pragma once

// Scripted stand-ins for a human teleoperator.
//
// A ControlScript is a time-ordered list of {t_start, v, c} knots. In step
// mode each knot holds until the next one; in linear mode v and c ramp
// between consecutive knots, the way an analog stick moves. After the last
// knot the final command holds.

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ikd {

/// Drive command: forward velocity (m/s) and curvature (1/m).
struct ControlCommand {
  double v = 0.0;
  double c = 0.0;

  double angular_velocity() const noexcept { return v * c; }
  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

struct ScriptSegment {
  double t_start = 0.0;
  double v = 0.0;
  double c = 0.0;

  friend bool operator==(const ScriptSegment&, const ScriptSegment&) = default;
};

enum class Interpolation { Step, Linear };

class ControlScript {
 public:
  ControlScript() = default;
  /// Throws ValidationError unless knots are finite, strictly increasing in
  /// t_start and the first knot starts at or before t = 0.
  explicit ControlScript(std::vector<ScriptSegment> segments,
                         Interpolation interpolation = Interpolation::Step);

  static ControlScript constant(double v, double c);

  ControlCommand command_at(double t) const;

  const std::vector<ScriptSegment>& segments() const noexcept { return segments_; }
  Interpolation interpolation() const noexcept { return interpolation_; }
  bool empty() const noexcept { return segments_.empty(); }
  double last_knot_time() const noexcept { return segments_.empty() ? 0.0 : segments_.back().t_start; }

  friend bool operator==(const ControlScript&, const ControlScript&) = default;

 private:
  std::vector<ScriptSegment> segments_;
  Interpolation interpolation_ = Interpolation::Step;
};

/// Accepts either {"interpolation": ..., "segments": [...]} or a bare segment list.
void to_json(nlohmann::json& j, const ControlScript& script);
void from_json(const nlohmann::json& j, ControlScript& script);
ControlScript load_script(const std::filesystem::path& path);

/// Random hold-then-ramp driving over a range of speeds and curvatures.
struct TeleopOptions {
  double duration = 600.0;
  /// Candidate cruise speeds; when empty, speeds are drawn from [v_min, v_max].
  std::vector<double> speeds;
  double v_min = 1.0;
  double v_max = 4.2;
  double c_max = 1.0;
  /// |c| = c_max * u^k with u uniform; k > 1 favors gentle turns.
  double curvature_exponent = 1.0;
  double hold_min = 3.0;
  double hold_max = 6.0;
  double ramp_time = 1.0;
  /// Fraction of holds driven straight (c = 0).
  double straight_fraction = 0.1;
  /// Fraction of turns taken clockwise (negative curvature).
  double clockwise_fraction = 0.5;
};

ControlScript make_teleop_script(const TeleopOptions& opts, std::uint64_t seed);

/// One turbo-entry drift: straight run at turbo speed, a hard curvature step
/// with the throttle cut, then a straight exit at low speed.
struct DriftOptions {
  double turbo_v = 4.2;
  double approach_time = 2.0;
  double turn_c = 0.9;
  double cut_v = 2.0;
  double turn_time = 1.5;
  double exit_v = 1.0;
  double exit_time = 1.0;
  /// +1 counter-clockwise, -1 clockwise.
  int direction = 1;
};

ControlScript make_drift_script(const DriftOptions& opts);
double drift_script_duration(const DriftOptions& opts);

}  // namespace ikd
