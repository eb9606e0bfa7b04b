#pragma once

// Closed-loop evaluation: circle tests (fitted radius vs commanded
// curvature) and drift runs scored against cone/box gates.

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ikd/geometry.hpp"
#include "ikd/mlp.hpp"
#include "ikd/simcore.hpp"

namespace ikd {

struct CircleFit {
  Vec2 center;
  double radius = 0.0;
};

/// Kasa algebraic least-squares fit on centered coordinates. Exact for
/// noiseless points on a circle; FitError for fewer than 3 or collinear points.
CircleFit fit_circle(std::span<const Vec2> points);

struct CircleReport {
  double c_commanded = 0.0;
  double r_fit = 0.0;
  double c_measured = 0.0;  ///< signed, 1 / r_fit in magnitude
  double deviation_pct = 0.0;
  bool ikd_enabled = false;

  friend bool operator==(const CircleReport&, const CircleReport&) = default;
};

struct CircleTestOptions {
  double sim_dt = kDefaultSimDt;
  double revolutions = 2.0;
  /// Transient discarded before fitting, in multiples of lag_tau.
  double settle_multiple = 5.0;
  double max_duration = 900.0;
  double eps_v = kDefaultEpsV;
};

/// Drives a constant command (corrected through `model` when given) until
/// `revolutions` turns have elapsed after settling, then fits the path.
CircleReport circle_test(double v, double c, const SlipParams& p,
                         const std::optional<MlpParams>& model,
                         const CircleTestOptions& opts = {});

/// Table row pairing the uncorrected and corrected runs.
struct CircleTableRow {
  double commanded_c = 0.0;
  double executed_c = 0.0;
  double ikd_c = 0.0;
  double deviation_pct = 0.0;  ///< of the corrected run
};

std::vector<CircleTableRow> pair_circle_reports(std::span<const CircleReport> reports);

inline constexpr double kCarWidth = 0.48;
inline constexpr double kCarLength = 0.55;
inline constexpr double kLooseGap = 2.13;
inline constexpr double kTightGap = 0.81;

struct Cone {
  Vec2 position;
  double radius = 0.0;
  friend bool operator==(const Cone&, const Cone&) = default;
};

/// The car must pass between cones[cone] and boxes[box].
struct Gate {
  std::size_t cone = 0;
  std::size_t box = 0;
  friend bool operator==(const Gate&, const Gate&) = default;
};

struct DriftScenario {
  std::string name;
  std::vector<OrientedBox> boxes;
  std::vector<Cone> cones;
  std::vector<Gate> gates;
  double gap = kLooseGap;
  double car_width = kCarWidth;
  double car_length = kCarLength;

  friend bool operator==(const DriftScenario&, const DriftScenario&) = default;
};

/// One cone and one box facing it across `gap`, placed along `outward`
/// (unit vector from the cone toward the box).
DriftScenario make_gate_scenario(std::string name, Vec2 cone, Vec2 outward, double gap,
                                 double box_length = 0.6, double box_depth = 0.4);

/// Gate around the default counter-clockwise drift, 2.13 m wide.
DriftScenario loose_drift_scenario();
/// Same placement with the 0.81 m gap.
DriftScenario tight_drift_scenario();

void to_json(nlohmann::json& j, const DriftScenario& s);
void from_json(const nlohmann::json& j, DriftScenario& s);
DriftScenario load_scenario(const std::filesystem::path& path);

struct ClearanceReport {
  double min_clearance = std::numeric_limits<double>::infinity();
  bool collided = false;
  double min_turn_radius = std::numeric_limits<double>::infinity();
  bool cleared_gate = false;
};

struct DriftEvalOptions {
  /// Samples with |av| above this belong to the drift arc.
  double av_threshold = 0.5;
};

ClearanceReport drift_eval(const SimTrace& trace, const DriftScenario& scenario,
                           const DriftEvalOptions& opts = {});

OrientedBox car_footprint(const VehicleState& s, double length, double width);

/// CSV: c_commanded,r_fit,c_measured,deviation_pct,ikd_enabled
void write_circle_reports_csv(const std::filesystem::path& path, std::span<const CircleReport> reports);
/// Re-checks c_measured * r_fit = 1 and the deviation formula on every row.
std::vector<CircleReport> read_circle_reports_csv(const std::filesystem::path& path);
/// CSV: commanded_c,executed_c,ikd_c,deviation_pct
void write_circle_table_csv(const std::filesystem::path& path, std::span<const CircleTableRow> rows);

struct LabeledClearance {
  std::string label;
  ClearanceReport report;
};

/// CSV: label,min_clearance,collided,min_turn_radius,cleared_gate
void write_clearance_csv(const std::filesystem::path& path, std::span<const LabeledClearance> rows);

}  // namespace ikd
