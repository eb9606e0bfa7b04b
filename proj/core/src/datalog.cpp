#include "ikd/datalog.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"

namespace ikd {
namespace {

constexpr std::string_view kJoyHeader = "t,v,av";
constexpr std::string_view kImuHeader = "t,av_z";

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return s;
}

template <std::size_t N>
std::array<double, N> parse_row(std::string_view line, std::size_t line_no) {
  std::array<double, N> values{};
  std::size_t col = 0;
  while (true) {
    const auto comma = line.find(',');
    const auto field = line.substr(0, comma);
    if (col >= N) {
      throw ParseError("expected " + std::to_string(N) + " columns", line_no);
    }
    if (!parse_double(field, values[col])) {
      throw ParseError("non-numeric value '" + std::string(strip(field)) + "' in column " +
                           std::to_string(col + 1),
                       line_no);
    }
    ++col;
    if (comma == std::string_view::npos) {
      break;
    }
    line.remove_prefix(comma + 1);
  }
  if (col != N) {
    throw ParseError("expected " + std::to_string(N) + " columns, found " + std::to_string(col),
                     line_no);
  }
  return values;
}

// Reads header + rows; `emit` receives each parsed row with its line number.
template <std::size_t N, typename Emit>
void read_table(std::istream& in, std::string_view header, Emit emit) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = strip(line);
    if (text.empty()) {
      continue;
    }
    if (!have_header) {
      std::string compact;
      for (char ch : text) {
        if (ch != ' ' && ch != '\t') {
          compact.push_back(ch);
        }
      }
      if (compact != header) {
        throw ParseError("expected header '" + std::string(header) + "'", line_no);
      }
      have_header = true;
      continue;
    }
    emit(parse_row<N>(text, line_no), line_no);
  }
  if (!have_header) {
    throw ParseError("missing header row '" + std::string(header) + "'");
  }
}

void check_time(double t, double prev, std::size_t index, bool first) {
  if (!std::isfinite(t)) {
    throw ValidationError("non-finite timestamp at row " + std::to_string(index));
  }
  if (!first && !(t > prev)) {
    throw ValidationError("timestamps not strictly increasing at row " + std::to_string(index));
  }
}

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

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return in;
}

}  // namespace

void validate(const JoyLog& log) {
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const auto& r = log.rows[i];
    check_time(r.t, i ? log.rows[i - 1].t : 0.0, i, i == 0);
    if (!std::isfinite(r.v) || !std::isfinite(r.av)) {
      throw ValidationError("non-finite joystick value at row " + std::to_string(i));
    }
  }
}

void validate(const ImuLog& log) {
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const auto& r = log.rows[i];
    check_time(r.t, i ? log.rows[i - 1].t : 0.0, i, i == 0);
    if (!std::isfinite(r.av_z)) {
      throw ValidationError("non-finite IMU value at row " + std::to_string(i));
    }
  }
}

void write_csv(std::ostream& out, const JoyLog& log) {
  validate(log);
  out << kJoyHeader << '\n';
  for (const auto& r : log.rows) {
    out << format_double(r.t) << ',' << format_double(r.v) << ',' << format_double(r.av) << '\n';
  }
}

void write_csv(std::ostream& out, const ImuLog& log) {
  validate(log);
  out << kImuHeader << '\n';
  for (const auto& r : log.rows) {
    out << format_double(r.t) << ',' << format_double(r.av_z) << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const JoyLog& log) {
  auto out = open_out(path);
  write_csv(out, log);
}

void write_csv(const std::filesystem::path& path, const ImuLog& log) {
  auto out = open_out(path);
  write_csv(out, log);
}

JoyLog read_joy_csv(std::istream& in) {
  JoyLog log;
  read_table<3>(in, kJoyHeader, [&](const std::array<double, 3>& v, std::size_t line_no) {
    if (!log.rows.empty() && !(v[0] > log.rows.back().t)) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": timestamps not strictly increasing");
    }
    log.rows.push_back({v[0], v[1], v[2]});
  });
  validate(log);
  return log;
}

ImuLog read_imu_csv(std::istream& in) {
  ImuLog log;
  read_table<2>(in, kImuHeader, [&](const std::array<double, 2>& v, std::size_t line_no) {
    if (!log.rows.empty() && !(v[0] > log.rows.back().t)) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": timestamps not strictly increasing");
    }
    log.rows.push_back({v[0], v[1]});
  });
  validate(log);
  return log;
}

JoyLog read_joy_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_joy_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ImuLog read_imu_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_imu_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::pair<JoyLog, ImuLog> trim_idle(const JoyLog& joy, const ImuLog& imu, double eps) {
  if (!(eps >= 0.0)) {
    throw ValidationError("idle threshold must be non-negative");
  }
  auto active = [eps](const JoySample& s) { return std::abs(s.v) >= eps || std::abs(s.av) >= eps; };
  std::size_t first = 0;
  while (first < joy.rows.size() && !active(joy.rows[first])) {
    ++first;
  }
  std::size_t last = joy.rows.size();
  while (last > first && !active(joy.rows[last - 1])) {
    --last;
  }
  if (first == last) {
    throw CorruptLogError("joystick log is idle throughout; nothing left after trimming");
  }
  JoyLog joy_out;
  joy_out.rows.assign(joy.rows.begin() + static_cast<std::ptrdiff_t>(first),
                      joy.rows.begin() + static_cast<std::ptrdiff_t>(last));
  const double t0 = joy_out.rows.front().t;
  const double t1 = joy_out.rows.back().t;
  ImuLog imu_out;
  for (const auto& s : imu.rows) {
    if (s.t >= t0 && s.t <= t1) {
      imu_out.rows.push_back(s);
    }
  }
  if (imu_out.empty()) {
    throw CorruptLogError("IMU log has no samples inside the active joystick window");
  }
  return {std::move(joy_out), std::move(imu_out)};
}

}  // namespace ikd
