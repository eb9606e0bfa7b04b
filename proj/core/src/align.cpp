#include "ikd/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"
#include "ikd/simcore.hpp"

namespace ikd {
namespace {

// Forward-only linear interpolator for monotone query sequences.
class Cursor {
 public:
  Cursor(std::span<const double> t, std::span<const double> y) : t_(t), y_(y) {}

  double at(double q) {
    while (j_ + 1 < t_.size() && t_[j_ + 1] <= q) {
      ++j_;
    }
    if (q <= t_.front()) {
      return y_.front();
    }
    if (j_ + 1 >= t_.size()) {
      return y_.back();
    }
    const double w = (q - t_[j_]) / (t_[j_ + 1] - t_[j_]);
    return y_[j_] + w * (y_[j_ + 1] - y_[j_]);
  }

 private:
  std::span<const double> t_;
  std::span<const double> y_;
  std::size_t j_ = 0;
};

struct Columns {
  std::vector<double> t;
  std::vector<double> a;
  std::vector<double> b;
};

Columns columns(const JoyLog& joy) {
  Columns c;
  c.t.reserve(joy.size());
  c.a.reserve(joy.size());
  c.b.reserve(joy.size());
  for (const auto& r : joy.rows) {
    c.t.push_back(r.t);
    c.a.push_back(r.v);
    c.b.push_back(r.av);
  }
  return c;
}

Columns columns(const ImuLog& imu) {
  Columns c;
  c.t.reserve(imu.size());
  c.a.reserve(imu.size());
  for (const auto& r : imu.rows) {
    c.t.push_back(r.t);
    c.a.push_back(r.av_z);
  }
  return c;
}

}  // namespace

double interpolate(std::span<const double> t, std::span<const double> y, double at) {
  if (t.empty() || t.size() != y.size()) {
    throw ValidationError("interpolation needs matching, non-empty sample arrays");
  }
  if (at <= t.front()) {
    return y.front();
  }
  if (at >= t.back()) {
    return y.back();
  }
  const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), at) - t.begin());
  const std::size_t lo = hi - 1;
  const double w = (at - t[lo]) / (t[hi] - t[lo]);
  return y[lo] + w * (y[hi] - y[lo]);
}

std::vector<DelayPoint> delay_error_curve(const JoyLog& joy, const ImuLog& imu,
                                          const DelaySearch& search) {
  if (!(search.lo < search.hi) || !(search.step > 0.0)) {
    throw ValidationError("delay search needs lo < hi and step > 0");
  }
  if (joy.size() < 2 || imu.size() < 2) {
    throw InsufficientOverlapError("delay estimation needs at least two samples per log");
  }
  const Columns j = columns(joy);
  const Columns m = columns(imu);
  const double imu_first = m.t.front();
  const double imu_last = m.t.back();

  const auto candidates =
      static_cast<std::size_t>(std::floor((search.hi - search.lo) / search.step + 1e-9)) + 1;
  std::vector<DelayPoint> curve;
  curve.reserve(candidates);
  for (std::size_t i = 0; i < candidates; ++i) {
    const double delay = search.lo + static_cast<double>(i) * search.step;
    Cursor cursor(m.t, m.a);
    double sum = 0.0;
    std::size_t count = 0;
    double span_lo = 0.0;
    double span_hi = 0.0;
    for (std::size_t k = 0; k < j.t.size(); ++k) {
      const double q = j.t[k] + delay;
      if (q < imu_first) {
        continue;
      }
      if (q > imu_last) {
        break;
      }
      const double e = j.b[k] - cursor.at(q);
      sum += e * e;
      if (count == 0) {
        span_lo = j.t[k];
      }
      span_hi = j.t[k];
      ++count;
    }
    if (count == 0 || span_hi - span_lo < kMinOverlap) {
      continue;
    }
    curve.push_back({delay, sum / static_cast<double>(count)});
  }
  if (curve.empty()) {
    throw InsufficientOverlapError("joystick and IMU logs overlap by less than " +
                                   format_double(kMinOverlap) + " s at every candidate delay");
  }
  return curve;
}

DelayEstimate estimate_delay(const JoyLog& joy, const ImuLog& imu, const DelaySearch& search) {
  const auto curve = delay_error_curve(joy, imu, search);
  const DelayPoint* best = &curve.front();
  for (const auto& p : curve) {
    if (p.objective < best->objective) {
      best = &p;
    }
  }
  DelayEstimate est;
  est.delay = best->delay;
  est.objective = best->objective;
  est.in_range = est.delay >= kDelayMin - 1e-12 && est.delay <= kDelayMax + 1e-12;
  est.suspect = !est.in_range || est.objective > search.objective_ceiling;
  return est;
}

AlignedDataset build_dataset(const JoyLog& joy, const ImuLog& imu, double delay, double rate) {
  if (!(rate > 0.0) || !std::isfinite(delay)) {
    throw ValidationError("dataset rate must be positive and delay finite");
  }
  if (joy.empty() || imu.empty()) {
    throw InsufficientOverlapError("cannot build a dataset from an empty log");
  }
  const Columns j = columns(joy);
  const Columns m = columns(imu);
  const double a = std::max(j.t.front(), m.t.front() - delay);
  const double b = std::min(j.t.back(), m.t.back() - delay);
  const auto n = b > a ? static_cast<std::size_t>(std::floor((b - a) * rate + 1e-9)) : 0;
  if (n == 0) {
    throw InsufficientOverlapError("joystick and shifted IMU logs do not overlap");
  }

  AlignedDataset out;
  out.period = 1.0 / rate;
  out.rows.reserve(n);
  Cursor v(j.t, j.a);
  Cursor av(j.t, j.b);
  Cursor av_imu(m.t, m.a);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = a + static_cast<double>(k) / rate;
    out.rows.push_back({static_cast<std::int64_t>(k), v.at(t),
                        std::clamp(av.at(t), -kMaxAngularVelocity, kMaxAngularVelocity),
                        std::clamp(av_imu.at(t + delay), -kMaxAngularVelocity, kMaxAngularVelocity)});
  }
  return out;
}

AlignedDataset merge_datasets(std::span<const AlignedDataset> parts) {
  AlignedDataset out;
  if (parts.empty()) {
    return out;
  }
  out.period = parts.front().period;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (std::abs(p.period - out.period) > 1e-9 * std::max(1.0, std::abs(out.period))) {
      throw ValidationError("cannot merge datasets with different sample periods");
    }
    total += p.size();
  }
  out.rows.reserve(total);
  std::int64_t idx = 0;
  for (const auto& p : parts) {
    for (auto row : p.rows) {
      row.idx = idx++;
      out.rows.push_back(row);
    }
  }
  return out;
}

double guarded_curvature(double av, double v, double eps_v) {
  return std::abs(v) < eps_v ? 0.0 : av / v;
}

AlignedDataset prune_zero_curvature(const AlignedDataset& d, double eps_c, double eps_v) {
  if (!(eps_c >= 0.0)) {
    throw ValidationError("curvature threshold must be non-negative");
  }
  AlignedDataset out;
  out.period = d.period;
  for (const auto& row : d.rows) {
    if (std::abs(guarded_curvature(row.av_joy, row.v_joy, eps_v)) > eps_c) {
      out.rows.push_back(row);
    }
  }
  return out;
}

std::vector<double> dataset_curvatures(const AlignedDataset& d, double eps_v) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const auto& row : d.rows) {
    out.push_back(guarded_curvature(row.av_joy, row.v_joy, eps_v));
  }
  return out;
}

std::vector<double> dataset_velocities(const AlignedDataset& d) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const auto& row : d.rows) {
    out.push_back(row.v_joy);
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const AlignedDataset& d) {
  out << "idx,v_joy,av_joy,av_imu\n";
  for (const auto& r : d.rows) {
    out << r.idx << ',' << format_double(r.v_joy) << ',' << format_double(r.av_joy) << ','
        << format_double(r.av_imu) << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const AlignedDataset& d) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  write_dataset_csv(out, d);
}

AlignedDataset read_dataset_csv(std::istream& in, double period) {
  AlignedDataset d;
  d.period = period;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (!have_header) {
      if (line != "idx,v_joy,av_joy,av_imu") {
        throw ParseError("expected header 'idx,v_joy,av_joy,av_imu'", line_no);
      }
      have_header = true;
      continue;
    }
    std::array<double, 4> v{};
    std::size_t col = 0;
    std::string_view rest(line);
    while (col < 4) {
      const auto comma = rest.find(',');
      if (!parse_double(rest.substr(0, comma), v[col])) {
        throw ParseError("non-numeric value in column " + std::to_string(col + 1), line_no);
      }
      ++col;
      if (comma == std::string_view::npos) {
        break;
      }
      rest.remove_prefix(comma + 1);
    }
    if (col != 4 || rest.find(',') != std::string_view::npos) {
      throw ParseError("expected 4 columns", line_no);
    }
    if (v[0] != std::floor(v[0])) {
      throw ParseError("idx must be an integer", line_no);
    }
    if (!std::isfinite(v[1]) || !std::isfinite(v[2]) || !std::isfinite(v[3])) {
      throw ValidationError("line " + std::to_string(line_no) + ": non-finite value");
    }
    d.rows.push_back({static_cast<std::int64_t>(v[0]), v[1], v[2], v[3]});
  }
  if (!have_header) {
    throw ParseError("missing dataset header row");
  }
  return d;
}

AlignedDataset read_dataset_csv(const std::filesystem::path& path, double period) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open dataset " + path.string());
  }
  try {
    return read_dataset_csv(in, period);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

double Histogram::bin_lo(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(counts.size());
}

double Histogram::bin_hi(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(counts.size());
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) {
    n += c;
  }
  return n;
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins < 1 || !(lo < hi)) {
    throw ValidationError("histogram needs bins >= 1 and lo < hi");
  }
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double x : values) {
    if (std::isnan(x)) {
      throw ValidationError("histogram input contains NaN");
    }
    const double pos = std::floor((x - lo) * scale);
    std::size_t idx = 0;
    if (pos >= static_cast<double>(bins)) {
      idx = bins - 1;
    } else if (pos > 0.0) {
      idx = static_cast<std::size_t>(pos);
    }
    ++h.counts[idx];
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << format_double(h.bin_lo(i)) << ',' << format_double(h.bin_hi(i)) << ',' << h.counts[i]
        << '\n';
  }
}

}  // namespace ikd
