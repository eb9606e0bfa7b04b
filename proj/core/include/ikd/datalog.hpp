#pragma once

// Joystick and IMU logs as exported from the recorder, one CSV per topic.
//
//   joystick CSV:  t,v,av      (seconds, m/s, rad/s)
//   IMU CSV:       t,av_z      (seconds, rad/s)
//
// The header row is mandatory. Timestamps must be strictly increasing.

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

namespace ikd {

struct JoySample {
  double t = 0.0;
  double v = 0.0;
  double av = 0.0;

  friend bool operator==(const JoySample&, const JoySample&) = default;
};

struct ImuSample {
  double t = 0.0;
  double av_z = 0.0;

  friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

struct JoyLog {
  std::vector<JoySample> rows;

  bool empty() const noexcept { return rows.empty(); }
  std::size_t size() const noexcept { return rows.size(); }
  friend bool operator==(const JoyLog&, const JoyLog&) = default;
};

struct ImuLog {
  std::vector<ImuSample> rows;

  bool empty() const noexcept { return rows.empty(); }
  std::size_t size() const noexcept { return rows.size(); }
  friend bool operator==(const ImuLog&, const ImuLog&) = default;
};

/// Throws ValidationError on non-finite values or non-increasing time.
void validate(const JoyLog& log);
void validate(const ImuLog& log);

void write_csv(std::ostream& out, const JoyLog& log);
void write_csv(std::ostream& out, const ImuLog& log);
void write_csv(const std::filesystem::path& path, const JoyLog& log);
void write_csv(const std::filesystem::path& path, const ImuLog& log);

/// Parse errors carry the offending 1-based line number.
JoyLog read_joy_csv(std::istream& in);
ImuLog read_imu_csv(std::istream& in);
JoyLog read_joy_csv(const std::filesystem::path& path);
ImuLog read_imu_csv(const std::filesystem::path& path);

inline constexpr double kDefaultIdleEps = 1e-3;

/// Drops the longest leading and trailing runs where the joystick is idle
/// (|v| < eps and |av| < eps) and cuts the IMU log to the surviving time
/// window. Throws CorruptLogError when nothing is left.
std::pair<JoyLog, ImuLog> trim_idle(const JoyLog& joy, const ImuLog& imu,
                                    double eps = kDefaultIdleEps);

}  // namespace ikd
