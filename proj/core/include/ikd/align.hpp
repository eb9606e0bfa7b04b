#pragma once

// Data preparation: joystick/IMU delay estimation, resampling onto a common
// grid, merging runs, dropping straight-line rows, histograms.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "ikd/datalog.hpp"

namespace ikd {

/// Delays outside this window point at a corrupt recording.
inline constexpr double kDelayMin = 0.0;
inline constexpr double kDelayMax = 0.5;
inline constexpr double kMinOverlap = 1.0;  ///< seconds

struct DelaySearch {
  double lo = kDelayMin;
  double hi = kDelayMax;
  double step = 0.001;
  /// Estimates whose alignment error exceeds this are flagged suspect.
  double objective_ceiling = std::numeric_limits<double>::infinity();
};

struct DelayPoint {
  double delay = 0.0;
  double objective = 0.0;
};

struct DelayEstimate {
  double delay = 0.0;
  double objective = 0.0;  ///< mean squared yaw-rate mismatch, (rad/s)^2
  bool in_range = false;   ///< delay within [kDelayMin, kDelayMax]
  bool suspect = false;    ///< out of range or objective above the ceiling
};

/// Alignment error for every grid delay with at least kMinOverlap seconds of
/// shifted overlap. Throws InsufficientOverlapError when no delay qualifies.
std::vector<DelayPoint> delay_error_curve(const JoyLog& joy, const ImuLog& imu,
                                          const DelaySearch& search = {});

/// Grid argmin of the mean squared error between av_joy(t) and av_imu(t + d);
/// ties resolve toward the smaller delay.
DelayEstimate estimate_delay(const JoyLog& joy, const ImuLog& imu, const DelaySearch& search = {});

struct AlignedRow {
  std::int64_t idx = 0;
  double v_joy = 0.0;
  double av_joy = 0.0;
  double av_imu = 0.0;

  friend bool operator==(const AlignedRow&, const AlignedRow&) = default;
};

struct AlignedDataset {
  double period = 0.0;  ///< seconds between rows
  std::vector<AlignedRow> rows;

  bool empty() const noexcept { return rows.empty(); }
  std::size_t size() const noexcept { return rows.size(); }
  friend bool operator==(const AlignedDataset&, const AlignedDataset&) = default;
};

inline constexpr double kDefaultDatasetRate = 40.0;

/// Linear interpolation of a sampled signal; clamps outside the support.
double interpolate(std::span<const double> t, std::span<const double> y, double at);

/// Resamples joystick and delay-shifted IMU onto an even grid covering the
/// shifted overlap [a, b): floor((b - a) * rate) rows.
AlignedDataset build_dataset(const JoyLog& joy, const ImuLog& imu, double delay,
                             double rate = kDefaultDatasetRate);

/// Concatenates in order and renumbers idx from 0. Periods must agree.
AlignedDataset merge_datasets(std::span<const AlignedDataset> parts);

inline constexpr double kDefaultPruneEpsC = 1e-4;
inline constexpr double kDefaultEpsV = 0.05;

/// Curvature av/v, defined as 0 when |v| < eps_v.
double guarded_curvature(double av, double v, double eps_v = kDefaultEpsV);

/// Drops rows whose guarded joystick curvature has |c| <= eps_c.
AlignedDataset prune_zero_curvature(const AlignedDataset& d, double eps_c = kDefaultPruneEpsC,
                                    double eps_v = kDefaultEpsV);

std::vector<double> dataset_curvatures(const AlignedDataset& d, double eps_v = kDefaultEpsV);
std::vector<double> dataset_velocities(const AlignedDataset& d);

/// Dataset CSV: idx,v_joy,av_joy,av_imu. The period is not stored in the file.
void write_dataset_csv(std::ostream& out, const AlignedDataset& d);
void write_dataset_csv(const std::filesystem::path& path, const AlignedDataset& d);
AlignedDataset read_dataset_csv(std::istream& in, double period = 1.0 / kDefaultDatasetRate);
AlignedDataset read_dataset_csv(const std::filesystem::path& path,
                                double period = 1.0 / kDefaultDatasetRate);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  double bin_lo(std::size_t i) const;
  double bin_hi(std::size_t i) const;
  std::size_t total() const;
};

/// Equal-width bins over [lo, hi]; out-of-range values land in the edge bins.
Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

/// CSV: bin_lo,bin_hi,count
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);

}  // namespace ikd
