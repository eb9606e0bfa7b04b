#pragma once

// Minimal SVG output for trajectories, time series and histograms.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ikd/align.hpp"
#include "ikd/eval.hpp"
#include "ikd/simcore.hpp"

namespace ikd {

struct LabeledTrace {
  std::string label;
  const SimTrace* trace = nullptr;
};

/// One polyline per trace, one rect per box, one circle per cone.
void write_trajectory_svg(const std::filesystem::path& path, std::span<const LabeledTrace> traces,
                          const DriftScenario* scenario = nullptr);

struct Series {
  std::string label;
  std::vector<double> y;
};

/// Line plot of several series sharing the x axis.
void write_series_svg(const std::filesystem::path& path, const std::string& title,
                      std::span<const double> x, std::span<const Series> series);

void write_histogram_svg(const std::filesystem::path& path, const std::string& title,
                         const Histogram& h);

}  // namespace ikd
