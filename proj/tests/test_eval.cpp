#include <cmath>
#include <numbers>
#include <regex>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ikd/error.hpp"
#include "ikd/eval.hpp"
#include "ikd/geometry.hpp"
#include "ikd/plot.hpp"
#include "testing.hpp"

namespace ikd {
namespace {

using ikd::testing::for_cases;
using ikd::testing::Gen;
using ikd::testing::kPropertyCases;
using ikd::testing::ScratchDir;
using ikd::testing::slurp;

std::vector<Vec2> circle_points(Vec2 center, double r, std::size_t n, double start = 0.0, double span = 2.0 * std::numbers::pi) {
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = start + span * static_cast<double>(i) / static_cast<double>(n);
    pts.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  return pts;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

TEST(FitCircle, ThreePoints) {
  const std::vector<Vec2> pts{{1, 0}, {0, 1}, {-1, 0}};
  const auto fit = fit_circle(pts);
  EXPECT_NEAR(fit.center.x, 0.0, 1e-12);
  EXPECT_NEAR(fit.center.y, 0.0, 1e-12);
  EXPECT_NEAR(fit.radius, 1.0, 1e-12);
}

TEST(FitCircle, ExactSamples) {
  const auto fit = fit_circle(circle_points({3.0, -2.0}, 1.49, 100));
  EXPECT_NEAR(fit.radius, 1.49, 1e-9);
  EXPECT_NEAR(fit.center.x, 3.0, 1e-9);
  EXPECT_NEAR(fit.center.y, -2.0, 1e-9);
}

TEST(FitCircle, NoisySamplesWithinHalfPercent) {
  for_cases(601, 100, [](Gen& g) {
    auto pts = circle_points({g.uniform(-50, 50), g.uniform(-50, 50)}, 1.49, 100);
    for (auto& p : pts) {
      p.x += g.normal(0.005);
      p.y += g.normal(0.005);
    }
    EXPECT_NEAR(fit_circle(pts).radius, 1.49, 0.005 * 1.49);
  });
}

TEST(FitCircle, DegenerateInputIsFitError) {
  const std::vector<Vec2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  EXPECT_THROW(fit_circle(line), FitError);
  const std::vector<Vec2> two{{0, 0}, {1, 0}};
  EXPECT_THROW(fit_circle(two), FitError);
  const std::vector<Vec2> same{{1, 1}, {1, 1}, {1, 1}};
  EXPECT_THROW(fit_circle(same), FitError);
}

TEST(CircleTest, ZeroSlipHasNoDeviation) {
  for (double c : {0.12, 0.7, -0.8}) {
    const auto plain = circle_test(2.0, c, SlipParams::ideal(), std::nullopt);
    EXPECT_LT(plain.deviation_pct, 1e-3) << c;
    EXPECT_FALSE(plain.ikd_enabled);
    const auto ident = circle_test(2.0, c, SlipParams::ideal(), identity_params());
    EXPECT_LT(ident.deviation_pct, 1e-3) << c;
    EXPECT_TRUE(ident.ikd_enabled);
    EXPECT_NEAR(plain.c_measured * plain.r_fit, c > 0 ? 1.0 : -1.0, 1e-12);
  }
}

TEST(CircleTest, SlipMatchesSteadyStateLaw) {
  // Settled av solves av = v c / (1 + beta v^2 |av|) for av = v c; the executed
  // curvature is av_true / v.
  const double v = 2.0;
  const double c = 0.7;
  const double expected_c = c / (1.0 + 0.02 * v * v * v * c);
  const auto r = circle_test(v, c, SlipParams{}, std::nullopt);
  EXPECT_NEAR(r.c_measured, expected_c, 1e-4);
  EXPECT_NEAR(expected_c, 0.62950, 1e-5);
  EXPECT_GE(r.deviation_pct, 4.0);
  EXPECT_NEAR(r.deviation_pct, 100.0 * (c - expected_c) / c, 0.02);
}

TEST(CircleTest, RejectsZeroCurvature) {
  EXPECT_THROW(circle_test(2.0, 0.0, SlipParams{}, std::nullopt), ValidationError);
}

TEST(CircleTable, PairsUncorrectedAndCorrectedRows) {
  const std::vector<CircleReport> reports{
      {0.7, 1.0 / 0.63, 0.63, 10.0, false}, {0.7, 1.0 / 0.69, 0.69, 100.0 / 70.0, true},
      {0.8, 1.0 / 0.7, 0.7, 12.5, false}};
  const auto rows = pair_circle_reports(reports);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].commanded_c, 0.7);
  EXPECT_EQ(rows[0].executed_c, 0.63);
  EXPECT_EQ(rows[0].ikd_c, 0.69);
}

// Car heading +y along x = gap / 2, passing the cone at the origin and the
// box beyond x = gap.
SimTrace straight_through(double x, double y0, double y1, double step = 0.01) {
  SimTrace t;
  t.dt = 0.01;
  for (double y = y0; y <= y1 + 1e-9; y += step) {
    VehicleState s;
    s.x = x;
    s.y = std::abs(y) < 1e-12 ? 0.0 : y;
    s.heading = std::numbers::pi / 2;
    s.v = 1.0;
    t.states.push_back(s);
    t.commands.push_back({1.0, 0.0});
  }
  t.commands.pop_back();
  return t;
}

TEST(DriftEval, CenterOfLooseGap) {
  const auto scen = make_gate_scenario("loose", {0.0, 0.0}, {1.0, 0.0}, kLooseGap);
  const auto r = drift_eval(straight_through(kLooseGap / 2, -3.0, 3.0), scen);
  EXPECT_NEAR(r.min_clearance, (2.13 - 0.48) / 2, 1e-12);
  EXPECT_FALSE(r.collided);
  EXPECT_TRUE(r.cleared_gate);
  EXPECT_TRUE(std::isinf(r.min_turn_radius));
}

TEST(DriftEval, OverlapIsCollision) {
  const auto scen = make_gate_scenario("tight", {0.0, 0.0}, {1.0, 0.0}, kTightGap);
  const auto r = drift_eval(straight_through(kTightGap + 0.1, -3.0, 3.0), scen);
  EXPECT_TRUE(r.collided);
  EXPECT_LE(r.min_clearance, 0.0);
  EXPECT_FALSE(r.cleared_gate);
}

TEST(DriftEval, MissingTheGateIsNotCleared) {
  const auto scen = make_gate_scenario("loose", {0.0, 0.0}, {1.0, 0.0}, kLooseGap);
  const auto r = drift_eval(straight_through(kLooseGap / 2, 1.0, 3.0), scen);
  EXPECT_FALSE(r.collided);
  EXPECT_FALSE(r.cleared_gate);
}

TEST(DriftEval, TurnRadiusFromYawRate) {
  auto t = straight_through(1.0, -1.0, 1.0);
  t.states[5].v = 2.0;
  t.states[5].av = 1.6;
  t.states[6].v = 2.0;
  t.states[6].av = 0.4;  // below the drift threshold, ignored
  EXPECT_DOUBLE_EQ(drift_eval(t, loose_drift_scenario()).min_turn_radius, 1.25);
}

TEST(DriftEval, RigidMotionInvariance) {
  const auto base_scen = loose_drift_scenario();
  const auto trace = run_scenario(make_drift_script({}), SlipParams{}, 4.5);
  const auto base = drift_eval(trace, base_scen);
  for_cases(602, 100, [&](Gen& g) {
    const double th = g.uniform(-3.1, 3.1);
    const Vec2 d{g.uniform(-20, 20), g.uniform(-20, 20)};
    auto move = [&](Vec2 p) {
      return Vec2{std::cos(th) * p.x - std::sin(th) * p.y + d.x, std::sin(th) * p.x + std::cos(th) * p.y + d.y};
    };
    auto moved = trace;
    for (auto& s : moved.states) {
      const Vec2 p = move({s.x, s.y});
      s.x = p.x;
      s.y = p.y;
      s.heading = normalize_angle(s.heading + th);
    }
    auto scen = base_scen;
    for (auto& b : scen.boxes) {
      b.center = move(b.center);
      b.yaw += th;
    }
    for (auto& c : scen.cones) {
      c.position = move(c.position);
    }
    const auto r = drift_eval(moved, scen);
    EXPECT_NEAR(r.min_clearance, base.min_clearance, 1e-9);
    EXPECT_EQ(r.collided, base.collided);
    EXPECT_EQ(r.cleared_gate, base.cleared_gate);
    EXPECT_DOUBLE_EQ(r.min_turn_radius, base.min_turn_radius);
  });
}

TEST(Scenarios, GateGaps) {
  EXPECT_EQ(loose_drift_scenario().gap, 2.13);
  EXPECT_EQ(tight_drift_scenario().gap, 0.81);
  EXPECT_EQ(loose_drift_scenario().car_width, 0.48);
  const auto s = loose_drift_scenario();
  const Vec2 face = closest_point(s.boxes[0], s.cones[0].position);
  EXPECT_NEAR(norm(face - s.cones[0].position), 2.13, 1e-12);
}

TEST(Scenarios, JsonRoundTrip) {
  const auto s = tight_drift_scenario();
  const nlohmann::json j = s;
  EXPECT_EQ(j.get<DriftScenario>(), s);
}

TEST(Geometry, PointDistanceMatchesSampling) {
  for_cases(603, kPropertyCases, [](Gen& g) {
    OrientedBox b{{g.uniform(-2, 2), g.uniform(-2, 2)}, g.uniform(0.1, 2), g.uniform(0.1, 2), g.uniform(-3, 3)};
    const Vec2 p{g.uniform(-5, 5), g.uniform(-5, 5)};
    const double d = signed_distance(b, p);
    if (d > 0.0) {
      // Dense boundary sampling gives an upper bound within the sampling step.
      const auto c = b.corners();
      double best = INFINITY;
      for (std::size_t e = 0; e < 4; ++e) {
        for (int k = 0; k <= 2000; ++k) {
          const double w = k / 2000.0;
          best = std::min(best, norm(p - (c[e] + w * (c[(e + 1) % 4] - c[e]))));
        }
      }
      EXPECT_LE(d, best + 1e-12);
      EXPECT_GE(d, best - 2e-3);
    } else {
      EXPECT_GE(d, -0.5 * std::min(b.length, b.width) - 1e-12);
    }
  });
}

TEST(Geometry, BoxDistanceExamples) {
  const OrientedBox a{{0, 0}, 2, 2, 0};
  EXPECT_NEAR(signed_distance(a, OrientedBox{{5, 0}, 2, 2, 0}), 3.0, 1e-12);
  EXPECT_LT(signed_distance(a, OrientedBox{{1.5, 0}, 2, 2, 0}), 0.0);
  EXPECT_NEAR(signed_distance(a, OrientedBox{{1.5, 0}, 2, 2, 0}), -0.5, 1e-12);
  EXPECT_TRUE(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
}

TEST(Reports, EmptyListIsHeaderOnly) {
  ScratchDir dir;
  write_circle_reports_csv(dir / "r.csv", {});
  EXPECT_EQ(slurp(dir / "r.csv"), "c_commanded,r_fit,c_measured,deviation_pct,ikd_enabled\n");
  EXPECT_TRUE(read_circle_reports_csv(dir / "r.csv").empty());
}

TEST(Reports, OneReportOneRow) {
  ScratchDir dir;
  const auto r = circle_test(2.0, 0.63, SlipParams{}, std::nullopt);
  const std::vector<CircleReport> one{r};
  write_circle_reports_csv(dir / "r.csv", one);
  const auto text = slurp(dir / "r.csv");
  EXPECT_EQ(count(text, "\n"), 2u);
  const auto row = text.substr(text.find('\n') + 1);
  EXPECT_EQ(count(row, ","), 4u);
  const auto back = read_circle_reports_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(Reports, InconsistentRowIsRejected) {
  ScratchDir dir;
  ikd::testing::spit(dir / "r.csv",
                     "c_commanded,r_fit,c_measured,deviation_pct,ikd_enabled\n0.7,2,0.6,14.2857,0\n");
  EXPECT_THROW(read_circle_reports_csv(dir / "r.csv"), ValidationError);
}

TEST(Reports, ClearanceCsv) {
  ScratchDir dir;
  const std::vector<LabeledClearance> rows{{"uncorrected", {0.5, false, 1.3, true}}, {"ikd", {-0.1, true, 1.1, false}}};
  write_clearance_csv(dir / "c.csv", rows);
  const auto text = slurp(dir / "c.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "label,min_clearance,collided,min_turn_radius,cleared_gate");
  EXPECT_EQ(count(text, "\n"), 3u);
  EXPECT_NE(text.find("ikd,-0.1,1,1.1,0"), std::string::npos);
}

TEST(Plots, TrajectoryHasOneShapePerObject) {
  ScratchDir dir;
  const auto a = run_scenario(make_drift_script({}), SlipParams{}, 4.5);
  const auto b = run_scenario(make_drift_script({}), SlipParams::ideal(), 4.5);
  const std::vector<LabeledTrace> traces{{"uncorrected", &a}, {"ikd", &b}};
  const auto scen = loose_drift_scenario();
  write_trajectory_svg(dir / "p/t.svg", traces, &scen);
  const auto svg = slurp(dir / "p/t.svg");
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  // Background and plot frame are rects too.
  EXPECT_EQ(count(svg, "<rect"), scen.boxes.size() + 2);
  EXPECT_EQ(count(svg, "<circle"), scen.cones.size());
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Plots, HistogramHasOneBarPerBin) {
  ScratchDir dir;
  const std::vector<double> values{0.1, 0.2, 0.9};
  write_histogram_svg(dir / "h.svg", "c", histogram(values, 7, 0.0, 1.0));
  EXPECT_EQ(count(slurp(dir / "h.svg"), "<rect"), 7u + 2u);
}

TEST(Plots, SeriesPlot) {
  ScratchDir dir;
  const std::vector<double> x{1, 2, 3};
  const std::vector<Series> s{{"train", {0.3, 0.2, 0.1}}, {"test", {0.4, 0.3, 0.2}}};
  write_series_svg(dir / "l.svg", "loss <mse>", x, s);
  const auto svg = slurp(dir / "l.svg");
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("loss &lt;mse&gt;"), std::string::npos);
}

}  // namespace
}  // namespace ikd
