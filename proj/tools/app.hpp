#pragma once

// Pipeline configuration and subcommand dispatch behind the `ikd` binary.
// Kept in a library so tests can drive subcommands in-process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ikd/align.hpp"
#include "ikd/eval.hpp"
#include "ikd/mlp.hpp"
#include "ikd/replay.hpp"
#include "ikd/script.hpp"
#include "ikd/simcore.hpp"

namespace ikd::app {

struct CircleConfig {
  double v = 2.0;
  std::vector<double> curvatures{0.12, 0.63, 0.80};
  CircleTestOptions options;
};

struct ReplayConfig {
  double rate = kDriveLoopRate;
  std::size_t stride = 1;
  /// 0 replays the buffer exactly once.
  double duration = 0.0;
};

struct PipelineConfig {
  /// Drives the teleop script, the IMU noise stream and training.
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  SlipParams slip;
  TeleopOptions teleop;
  std::optional<std::filesystem::path> script_file;
  DriftOptions drift;
  SensorOptions sensor;
  DelaySearch delay;
  double dataset_rate = kDefaultDatasetRate;
  double prune_eps_c = kDefaultPruneEpsC;
  TrainConfig train;
  CircleConfig circle;
  ReplayConfig replay;
  /// "loose", "tight" or a scenario JSON path.
  std::string scenario = "loose";

  void set_seed(std::uint64_t s);
};

/// Unknown keys are rejected. Relative file references resolve against `base_dir`
/// and must exist.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Fixed output tree under one root.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path logs() const { return root / "logs"; }
  std::filesystem::path datasets() const { return root / "datasets"; }
  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path plots() const { return root / "plots"; }
};

/// --out, then the config's output_dir, then $IKD_OUT_DIR, then ./ikd_out.
OutputLayout resolve_layout(const std::optional<std::filesystem::path>& flag, const PipelineConfig& cfg);

DriftScenario resolve_scenario(const std::string& name_or_path);

/// Entry point shared by main() and tests. Returns the process exit code; every
/// failure prints exactly one diagnostic line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ikd::app
