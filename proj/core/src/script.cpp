#include "ikd/script.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "ikd/error.hpp"

namespace ikd {

ControlScript::ControlScript(std::vector<ScriptSegment> segments, Interpolation interpolation)
    : segments_(std::move(segments)), interpolation_(interpolation) {
  if (segments_.empty()) {
    throw ValidationError("control script has no segments");
  }
  if (segments_.front().t_start > 0.0) {
    throw ValidationError("control script must start at or before t = 0");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!std::isfinite(s.t_start) || !std::isfinite(s.v) || !std::isfinite(s.c)) {
      throw ValidationError("control script segment " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(s.t_start > segments_[i - 1].t_start)) {
      throw ValidationError("control script segment " + std::to_string(i) +
                            " does not start after its predecessor");
    }
  }
}

ControlScript ControlScript::constant(double v, double c) {
  return ControlScript({{0.0, v, c}}, Interpolation::Step);
}

ControlCommand ControlScript::command_at(double t) const {
  if (segments_.empty()) {
    return {};
  }
  auto after = std::upper_bound(segments_.begin(), segments_.end(), t,
                                [](double time, const ScriptSegment& s) { return time < s.t_start; });
  if (after == segments_.begin()) {
    return {segments_.front().v, segments_.front().c};
  }
  const auto& cur = *std::prev(after);
  if (interpolation_ == Interpolation::Step || after == segments_.end()) {
    return {cur.v, cur.c};
  }
  const double w = (t - cur.t_start) / (after->t_start - cur.t_start);
  return {cur.v + w * (after->v - cur.v), cur.c + w * (after->c - cur.c)};
}

void to_json(nlohmann::json& j, const ControlScript& script) {
  auto segments = nlohmann::json::array();
  for (const auto& s : script.segments()) {
    segments.push_back({{"t_start", s.t_start}, {"v", s.v}, {"c", s.c}});
  }
  j = nlohmann::json{
      {"interpolation", script.interpolation() == Interpolation::Linear ? "linear" : "step"},
      {"segments", std::move(segments)}};
}

void from_json(const nlohmann::json& j, ControlScript& script) {
  const nlohmann::json* list = &j;
  auto interp = Interpolation::Step;
  if (j.is_object()) {
    const auto mode = j.value("interpolation", std::string("step"));
    if (mode == "linear") {
      interp = Interpolation::Linear;
    } else if (mode != "step") {
      throw ValidationError("unknown script interpolation '" + mode + "'");
    }
    list = &j.at("segments");
  }
  if (!list->is_array()) {
    throw ValidationError("control script segments must be a JSON array");
  }
  std::vector<ScriptSegment> segments;
  for (const auto& s : *list) {
    segments.push_back({s.at("t_start").get<double>(), s.at("v").get<double>(),
                        s.at("c").get<double>()});
  }
  script = ControlScript(std::move(segments), interp);
}

ControlScript load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open script file " + path.string());
  }
  try {
    return nlohmann::json::parse(in).get<ControlScript>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ControlScript make_teleop_script(const TeleopOptions& opts, std::uint64_t seed) {
  if (!(opts.duration > 0.0) || !(opts.hold_min > 0.0) || opts.hold_max < opts.hold_min ||
      opts.ramp_time < 0.0 || opts.c_max < 0.0 ||
      !(opts.curvature_exponent > 0.0)) {
    throw ValidationError("invalid teleop script options");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick_speed = [&] {
    if (!opts.speeds.empty()) {
      return opts.speeds[static_cast<std::size_t>(unit(rng) * static_cast<double>(opts.speeds.size())) %
                         opts.speeds.size()];
    }
    return opts.v_min + unit(rng) * (opts.v_max - opts.v_min);
  };
  auto pick_curvature = [&] {
    if (unit(rng) < opts.straight_fraction) {
      return 0.0;
    }
    const double magnitude = std::pow(unit(rng), opts.curvature_exponent) * opts.c_max;
    return unit(rng) < opts.clockwise_fraction ? -magnitude : magnitude;
  };

  const auto interp = opts.ramp_time > 0.0 ? Interpolation::Linear : Interpolation::Step;
  const bool ramped = interp == Interpolation::Linear;
  // Ramped scripts start from rest and come back to rest at `duration`.
  const double end = ramped ? opts.duration - opts.ramp_time : opts.duration;
  std::vector<ScriptSegment> knots;
  double t = 0.0;
  if (ramped) {
    knots.push_back({0.0, 0.0, 0.0});
    t = opts.ramp_time;
  }
  while (t < end) {
    const double v = pick_speed();
    const double c = pick_curvature();
    const double hold = opts.hold_min + unit(rng) * (opts.hold_max - opts.hold_min);
    knots.push_back({t, v, c});
    if (ramped) {
      const double hold_end = std::min(t + hold, end);
      if (hold_end > t) {
        knots.push_back({hold_end, v, c});
      }
      t = hold_end + opts.ramp_time;
    } else {
      t += hold;
    }
  }
  if (ramped) {
    knots.push_back({opts.duration, 0.0, 0.0});
  }
  return ControlScript(std::move(knots), interp);
}

ControlScript make_drift_script(const DriftOptions& opts) {
  if (!(opts.approach_time > 0.0) || !(opts.turn_time > 0.0) || opts.exit_time < 0.0 ||
      (opts.direction != 1 && opts.direction != -1)) {
    throw ValidationError("invalid drift script options");
  }
  const double c = opts.direction * opts.turn_c;
  const double t_turn = opts.approach_time;
  const double t_exit = t_turn + opts.turn_time;
  std::vector<ScriptSegment> knots{
      {0.0, opts.turbo_v, 0.0},
      {t_turn, opts.cut_v, c},
      {t_exit, opts.exit_v, 0.0},
  };
  return ControlScript(std::move(knots), Interpolation::Step);
}

double drift_script_duration(const DriftOptions& opts) {
  return opts.approach_time + opts.turn_time + opts.exit_time;
}

}  // namespace ikd
