#include "ikd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ikd/correction.hpp"
#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"

namespace ikd {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

// Default gate placement around the drift produced by DriftOptions{}.
constexpr double kLooseConeX = 8.30;
constexpr double kLooseConeY = 1.30;
constexpr double kLooseOutwardX = 1.0;
constexpr double kLooseOutwardY = 0.0;

double deviation_pct(double measured, double commanded) {
  return 100.0 * std::abs(measured - commanded) / std::abs(commanded);
}

}  // namespace

CircleFit fit_circle(std::span<const Vec2> points) {
  if (points.size() < 3) {
    throw FitError("circle fit needs at least 3 points");
  }
  const double n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double suu = 0.0, suv = 0.0, svv = 0.0, suuu = 0.0, svvv = 0.0, suvv = 0.0, svuu = 0.0;
  for (const auto& p : points) {
    const double u = p.x - mx;
    const double v = p.y - my;
    suu += u * u;
    suv += u * v;
    svv += v * v;
    suuu += u * u * u;
    svvv += v * v * v;
    suvv += u * v * v;
    svuu += v * u * u;
  }
  const double det = suu * svv - suv * suv;
  const double scale = (suu + svv) * (suu + svv);
  if (!(scale > 0.0) || det <= 1e-12 * scale) {
    throw FitError("points are collinear or coincident; no circle fits");
  }
  const double bu = 0.5 * (suuu + suvv);
  const double bv = 0.5 * (svvv + svuu);
  const double uc = (bu * svv - bv * suv) / det;
  const double vc = (suu * bv - suv * bu) / det;
  CircleFit fit;
  fit.center = {uc + mx, vc + my};
  fit.radius = std::sqrt(uc * uc + vc * vc + (suu + svv) / n);
  if (!std::isfinite(fit.radius)) {
    throw FitError("circle fit diverged");
  }
  return fit;
}

CircleReport circle_test(double v, double c, const SlipParams& p,
                         const std::optional<MlpParams>& model, const CircleTestOptions& opts) {
  if (!std::isfinite(v) || !std::isfinite(c) || c == 0.0) {
    throw ValidationError("circle test needs a finite, non-zero curvature");
  }
  if (std::abs(v) < opts.eps_v) {
    throw ValidationError("circle test needs |v| >= eps_v");
  }
  p.validate();
  ControlCommand cmd{v, c};
  if (model) {
    cmd.c = correct(*model, v, c, opts.eps_v).c_corrected;
  }

  const double settle = opts.settle_multiple * p.lag_tau;
  const double target_turn = opts.revolutions * 2.0 * std::numbers::pi;
  VehicleState state;
  double t = 0.0;
  double turned = 0.0;
  std::vector<Vec2> points;
  while (std::abs(turned) < target_turn) {
    if (t > opts.max_duration) {
      throw FitError("circle test did not complete the requested revolutions within " +
                     format_double(opts.max_duration) + " s");
    }
    state = step_dynamics(state, cmd, p, opts.sim_dt);
    t += opts.sim_dt;
    if (t >= settle) {
      points.push_back({state.x, state.y});
      turned += state.av * opts.sim_dt;
    }
  }
  const CircleFit fit = fit_circle(points);
  CircleReport r;
  r.c_commanded = c;
  r.r_fit = fit.radius;
  const double direction = (turned > 0.0) == (v > 0.0) ? 1.0 : -1.0;
  r.c_measured = direction / fit.radius;
  r.deviation_pct = deviation_pct(r.c_measured, c);
  r.ikd_enabled = model.has_value();
  return r;
}

std::vector<CircleTableRow> pair_circle_reports(std::span<const CircleReport> reports) {
  std::vector<CircleTableRow> rows;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].ikd_enabled) {
      continue;
    }
    for (std::size_t k = 0; k < reports.size(); ++k) {
      if (reports[k].ikd_enabled && reports[k].c_commanded == reports[i].c_commanded) {
        rows.push_back({reports[i].c_commanded, reports[i].c_measured, reports[k].c_measured,
                        reports[k].deviation_pct});
        break;
      }
    }
  }
  return rows;
}

DriftScenario make_gate_scenario(std::string name, Vec2 cone, Vec2 outward, double gap,
                                 double box_length, double box_depth) {
  const double len = norm(outward);
  if (!(len > 0.0) || !(gap > 0.0)) {
    throw ValidationError("gate needs a non-zero direction and positive gap");
  }
  const Vec2 dir = (1.0 / len) * outward;
  DriftScenario s;
  s.name = std::move(name);
  s.gap = gap;
  s.cones.push_back({cone, 0.0});
  OrientedBox box;
  box.center = cone + (gap + 0.5 * box_depth) * dir;
  box.length = box_depth;
  box.width = box_length;
  box.yaw = std::atan2(dir.y, dir.x);
  s.boxes.push_back(box);
  s.gates.push_back({0, 0});
  return s;
}

// Cone placed inside the commanded arc of the default drift script (see
// make_drift_script), box outward across the gate.
DriftScenario loose_drift_scenario() {
  return make_gate_scenario("loose", {kLooseConeX, kLooseConeY}, {kLooseOutwardX, kLooseOutwardY},
                            kLooseGap);
}

DriftScenario tight_drift_scenario() {
  return make_gate_scenario("tight", {kLooseConeX, kLooseConeY}, {kLooseOutwardX, kLooseOutwardY},
                            kTightGap);
}

void to_json(nlohmann::json& j, const DriftScenario& s) {
  auto boxes = nlohmann::json::array();
  for (const auto& b : s.boxes) {
    boxes.push_back({{"center", {b.center.x, b.center.y}},
                     {"length", b.length},
                     {"width", b.width},
                     {"yaw", b.yaw}});
  }
  auto cones = nlohmann::json::array();
  for (const auto& c : s.cones) {
    cones.push_back({{"position", {c.position.x, c.position.y}}, {"radius", c.radius}});
  }
  auto gates = nlohmann::json::array();
  for (const auto& g : s.gates) {
    gates.push_back({{"cone", g.cone}, {"box", g.box}});
  }
  j = nlohmann::json{{"name", s.name},     {"gap", s.gap},     {"car_width", s.car_width},
                     {"car_length", s.car_length}, {"boxes", boxes}, {"cones", cones},
                     {"gates", gates}};
}

void from_json(const nlohmann::json& j, DriftScenario& s) {
  s = DriftScenario{};
  s.name = j.value("name", std::string("scenario"));
  s.gap = j.value("gap", kLooseGap);
  s.car_width = j.value("car_width", kCarWidth);
  s.car_length = j.value("car_length", kCarLength);
  for (const auto& b : j.value("boxes", nlohmann::json::array())) {
    const auto& c = b.at("center");
    s.boxes.push_back({{c.at(0).get<double>(), c.at(1).get<double>()},
                       b.at("length").get<double>(),
                       b.at("width").get<double>(),
                       b.value("yaw", 0.0)});
  }
  for (const auto& c : j.value("cones", nlohmann::json::array())) {
    const auto& pos = c.at("position");
    s.cones.push_back({{pos.at(0).get<double>(), pos.at(1).get<double>()}, c.value("radius", 0.0)});
  }
  for (const auto& g : j.value("gates", nlohmann::json::array())) {
    s.gates.push_back({g.at("cone").get<std::size_t>(), g.at("box").get<std::size_t>()});
  }
  for (const auto& g : s.gates) {
    if (g.cone >= s.cones.size() || g.box >= s.boxes.size()) {
      throw ValidationError("scenario gate refers to a missing cone or box");
    }
  }
  if (!(s.car_width > 0.0) || !(s.car_length > 0.0)) {
    throw ValidationError("scenario car dimensions must be positive");
  }
}

DriftScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open scenario " + path.string());
  }
  try {
    return nlohmann::json::parse(in).get<DriftScenario>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

OrientedBox car_footprint(const VehicleState& s, double length, double width) {
  return {{s.x, s.y}, length, width, s.heading};
}

ClearanceReport drift_eval(const SimTrace& trace, const DriftScenario& scenario,
                           const DriftEvalOptions& opts) {
  if (trace.states.empty()) {
    throw ValidationError("drift evaluation needs a non-empty trace");
  }
  ClearanceReport r;
  for (const auto& s : trace.states) {
    const OrientedBox car = car_footprint(s, scenario.car_length, scenario.car_width);
    for (const auto& box : scenario.boxes) {
      r.min_clearance = std::min(r.min_clearance, signed_distance(car, box));
    }
    for (const auto& cone : scenario.cones) {
      r.min_clearance = std::min(r.min_clearance, signed_distance(car, cone.position) - cone.radius);
    }
    if (std::abs(s.av) > opts.av_threshold && std::abs(s.v) >= kDefaultEpsV) {
      r.min_turn_radius = std::min(r.min_turn_radius, std::abs(s.v) / std::abs(s.av));
    }
  }
  r.collided = r.min_clearance <= 0.0;

  bool all_gates = true;
  for (const auto& g : scenario.gates) {
    const Vec2 a = scenario.cones[g.cone].position;
    const Vec2 b = closest_point(scenario.boxes[g.box], a);
    bool crossed = false;
    for (std::size_t i = 1; i < trace.states.size() && !crossed; ++i) {
      const auto& p0 = trace.states[i - 1];
      const auto& p1 = trace.states[i];
      crossed = segments_intersect({p0.x, p0.y}, {p1.x, p1.y}, a, b);
    }
    all_gates = all_gates && crossed;
  }
  r.cleared_gate = all_gates && !r.collided;
  return r;
}

void write_circle_reports_csv(const std::filesystem::path& path,
                              std::span<const CircleReport> reports) {
  auto out = open_out(path);
  out << "c_commanded,r_fit,c_measured,deviation_pct,ikd_enabled\n";
  for (const auto& r : reports) {
    out << format_double(r.c_commanded) << ',' << format_double(r.r_fit) << ','
        << format_double(r.c_measured) << ',' << format_double(r.deviation_pct) << ','
        << (r.ikd_enabled ? 1 : 0) << '\n';
  }
}

std::vector<CircleReport> read_circle_reports_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<CircleReport> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line_no == 1) {
      if (line != "c_commanded,r_fit,c_measured,deviation_pct,ikd_enabled") {
        throw ParseError("unexpected circle report header", line_no);
      }
      continue;
    }
    std::array<double, 5> v{};
    std::stringstream ss(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(ss, field, ',')) {
      if (col >= v.size() || !parse_double(field, v[col])) {
        throw ParseError("malformed circle report row", line_no);
      }
      ++col;
    }
    if (col != v.size()) {
      throw ParseError("expected 5 columns", line_no);
    }
    CircleReport r{v[0], v[1], v[2], v[3], v[4] != 0.0};
    if (std::abs(std::abs(r.c_measured) * r.r_fit - 1.0) > 1e-9 ||
        std::abs(r.deviation_pct - deviation_pct(r.c_measured, r.c_commanded)) >
            1e-9 * std::max(1.0, r.deviation_pct)) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": circle report fields are inconsistent");
    }
    out.push_back(r);
  }
  return out;
}

void write_circle_table_csv(const std::filesystem::path& path, std::span<const CircleTableRow> rows) {
  auto out = open_out(path);
  out << "commanded_c,executed_c,ikd_c,deviation_pct\n";
  for (const auto& r : rows) {
    out << format_double(r.commanded_c) << ',' << format_double(r.executed_c) << ','
        << format_double(r.ikd_c) << ',' << format_double(r.deviation_pct) << '\n';
  }
}

void write_clearance_csv(const std::filesystem::path& path, std::span<const LabeledClearance> rows) {
  auto out = open_out(path);
  out << "label,min_clearance,collided,min_turn_radius,cleared_gate\n";
  for (const auto& r : rows) {
    out << r.label << ',' << format_double(r.report.min_clearance) << ','
        << (r.report.collided ? 1 : 0) << ',' << format_double(r.report.min_turn_radius) << ','
        << (r.report.cleared_gate ? 1 : 0) << '\n';
  }
}

}  // namespace ikd
