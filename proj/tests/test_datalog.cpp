#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "ikd/datalog.hpp"
#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"
#include "testing.hpp"

namespace ikd {
namespace {

using ikd::testing::for_cases;
using ikd::testing::Gen;
using ikd::testing::kPropertyCases;

JoyLog random_joy(Gen& g, std::size_t n) {
  JoyLog log;
  double t = g.uniform(-5.0, 5.0);
  for (std::size_t i = 0; i < n; ++i) {
    t += g.uniform(1e-4, 0.1);
    log.rows.push_back({t, g.uniform(-4.2, 4.2), g.normal(2.0)});
  }
  return log;
}

TEST(NumFmt, RoundTripsAwkwardValues) {
  for (double v : {0.0, 0.1, 1.0 / 3.0, 1e-300, 5e-324, 1.7976931348623157e308, -2.5e-7}) {
    double back = 1.0;
    ASSERT_TRUE(parse_double(format_double(v), back)) << format_double(v);
    EXPECT_EQ(back, v);
    EXPECT_EQ(std::signbit(back), std::signbit(v));
  }
}

TEST(NumFmt, NegativeZeroIsFolded) {
  EXPECT_EQ(format_double(-0.0), "0");
}

TEST(NumFmt, RejectsGarbage) {
  double out = 0.0;
  EXPECT_FALSE(parse_double("", out));
  EXPECT_FALSE(parse_double("abc", out));
  EXPECT_FALSE(parse_double("1.5x", out));
  EXPECT_TRUE(parse_double("1.5", out));
  EXPECT_EQ(out, 1.5);
}

TEST(Datalog, JoyRoundTripIsExact) {
  for_cases(101, kPropertyCases, [](Gen& g) {
    const auto log = random_joy(g, static_cast<std::size_t>(g.integer(0, 40)));
    std::stringstream ss;
    write_csv(ss, log);
    EXPECT_EQ(read_joy_csv(ss), log);
  });
}

TEST(Datalog, ImuRoundTripIsExact) {
  for_cases(102, kPropertyCases, [](Gen& g) {
    ImuLog log;
    double t = 0.0;
    for (long i = 0, n = g.integer(0, 40); i < n; ++i) {
      t += g.uniform(1e-4, 0.1);
      log.rows.push_back({t, g.normal(1.0)});
    }
    std::stringstream ss;
    write_csv(ss, log);
    EXPECT_EQ(read_imu_csv(ss), log);
  });
}

TEST(Datalog, EmptyLogIsHeaderOnly) {
  std::stringstream ss;
  write_csv(ss, JoyLog{});
  EXPECT_EQ(ss.str(), "t,v,av\n");
  EXPECT_TRUE(read_joy_csv(ss).empty());

  std::stringstream imu;
  write_csv(imu, ImuLog{});
  EXPECT_EQ(imu.str(), "t,av_z\n");
  EXPECT_TRUE(read_imu_csv(imu).empty());
}

TEST(Datalog, TextInNumericColumnNamesTheLine) {
  std::istringstream in("t,v,av\n0,1,0\n0.025,fast,0\n");
  try {
    read_joy_csv(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Datalog, WrongFieldCountIsParseError) {
  std::istringstream in("t,av_z\n0,1,2\n");
  EXPECT_THROW(read_imu_csv(in), ParseError);
}

TEST(Datalog, MissingHeaderIsParseError) {
  std::istringstream in("0,1,0\n");
  EXPECT_THROW(read_joy_csv(in), ParseError);
}

TEST(Datalog, NonMonotonicTimeIsValidationError) {
  std::istringstream in("t,v,av\n0,1,0\n0.5,1,0\n0.5,1,0\n");
  EXPECT_THROW(read_joy_csv(in), ValidationError);
  JoyLog log{{{1.0, 0.0, 0.0}, {0.5, 0.0, 0.0}}};
  EXPECT_THROW(validate(log), ValidationError);
}

TEST(Datalog, NonFiniteIsRejected) {
  JoyLog log{{{0.0, NAN, 0.0}}};
  EXPECT_THROW(validate(log), ValidationError);
  ImuLog imu{{{0.0, INFINITY}}};
  EXPECT_THROW(validate(imu), ValidationError);
}

TEST(Datalog, MissingFileIsIoError) {
  EXPECT_THROW(read_joy_csv(std::filesystem::path("/nonexistent/joy.csv")), IoError);
}

std::pair<JoyLog, ImuLog> padded_logs() {
  JoyLog joy;
  ImuLog imu;
  for (int i = 0; i < 200; ++i) {
    const double t = i * 0.025;
    const bool driving = i >= 40 && i < 160;
    joy.rows.push_back({t, driving ? 2.0 : 0.0, driving ? 0.5 + 0.01 * i : 0.0});
    imu.rows.push_back({t + 0.01, driving ? 0.4 : 0.0});
  }
  return {joy, imu};
}

TEST(TrimIdle, RemovesPaddingAndKeepsInterior) {
  const auto [joy, imu] = padded_logs();
  const auto [tj, ti] = trim_idle(joy, imu);
  ASSERT_EQ(tj.size(), 120u);
  EXPECT_EQ(tj.rows.front(), joy.rows[40]);
  EXPECT_EQ(tj.rows.back(), joy.rows[159]);
  for (const auto& s : ti.rows) {
    EXPECT_GE(s.t, tj.rows.front().t);
    EXPECT_LE(s.t, tj.rows.back().t);
  }
  EXPECT_FALSE(ti.empty());
}

TEST(TrimIdle, LeavesBusyLogsUnchanged) {
  JoyLog joy{{{0.0, 1.0, 0.2}, {0.1, 1.0, 0.3}, {0.2, 1.0, 0.4}}};
  ImuLog imu{{{0.0, 0.1}, {0.1, 0.2}, {0.2, 0.3}}};
  const auto [tj, ti] = trim_idle(joy, imu);
  EXPECT_EQ(tj, joy);
  EXPECT_EQ(ti, imu);
}

TEST(TrimIdle, AllZeroIsCorrupt) {
  JoyLog joy{{{0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}}};
  ImuLog imu{{{0.0, 0.0}}};
  EXPECT_THROW(trim_idle(joy, imu), CorruptLogError);
}

TEST(TrimIdle, IsIdempotent) {
  for_cases(103, kPropertyCases, [](Gen& g) {
    JoyLog joy;
    ImuLog imu;
    const long n = g.integer(2, 60);
    for (long i = 0; i < n; ++i) {
      const double t = 0.025 * static_cast<double>(i);
      const bool idle = g.uniform(0.0, 1.0) < 0.4;
      joy.rows.push_back({t, idle ? 0.0 : g.uniform(0.1, 3.0), idle ? 0.0 : g.normal(1.0)});
      imu.rows.push_back({t, g.normal(1.0)});
    }
    joy.rows[static_cast<std::size_t>(g.integer(0, n - 1))].v = 1.0;
    const auto once = trim_idle(joy, imu);
    const auto twice = trim_idle(once.first, once.second);
    EXPECT_EQ(twice.first, once.first);
    EXPECT_EQ(twice.second, once.second);
  });
}

}  // namespace
}  // namespace ikd
