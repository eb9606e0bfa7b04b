#include "ikd/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"

namespace ikd {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 40.0;
constexpr std::array<const char*, 6> kColors{"#1f77b4", "#ff7f0e", "#2ca02c",
                                             "#d62728", "#9467bd", "#8c564b"};

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      return;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }

  void finish(bool equal_aspect) {
    if (!(x0 <= x1)) {
      x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    }
    if (x1 - x0 < 1e-9) {
      x0 -= 0.5, x1 += 0.5;
    }
    if (y1 - y0 < 1e-9) {
      y0 -= 0.5, y1 += 0.5;
    }
    if (equal_aspect) {
      const double sx = (x1 - x0) / (kWidth - 2 * kMargin);
      const double sy = (y1 - y0) / (kHeight - 2 * kMargin);
      const double s = std::max(sx, sy);
      const double cx = 0.5 * (x0 + x1);
      const double cy = 0.5 * (y0 + y1);
      x0 = cx - 0.5 * s * (kWidth - 2 * kMargin);
      x1 = cx + 0.5 * s * (kWidth - 2 * kMargin);
      y0 = cy - 0.5 * s * (kHeight - 2 * kMargin);
      y1 = cy + 0.5 * s * (kHeight - 2 * kMargin);
    }
  }

  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
  double scale() const { return (kWidth - 2 * kMargin) / (x1 - x0); }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::ofstream open_svg(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

void axes(std::ostream& out, const Bounds& b, const std::string& title) {
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#999\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << kHeight - 12 << "\" font-size=\"10\">"
      << format_double(b.x0) << "</text>\n";
  out << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(b.x1) << "</text>\n";
  out << "<text x=\"4\" y=\"" << kHeight - kMargin << "\" font-size=\"10\">" << format_double(b.y0)
      << "</text>\n";
  out << "<text x=\"4\" y=\"" << kMargin + 10 << "\" font-size=\"10\">" << format_double(b.y1)
      << "</text>\n";
}

void legend(std::ostream& out, std::size_t i, const std::string& label) {
  const double y = kMargin + 16 + 14 * static_cast<double>(i);
  out << "<text x=\"" << kMargin + 8 << "\" y=\"" << y << "\" font-size=\"11\" fill=\""
      << kColors[i % kColors.size()] << "\">" << escape(label) << "</text>\n";
}

}  // namespace

void write_trajectory_svg(const std::filesystem::path& path, std::span<const LabeledTrace> traces,
                          const DriftScenario* scenario) {
  Bounds b;
  for (const auto& t : traces) {
    if (t.trace == nullptr) {
      continue;
    }
    for (const auto& s : t.trace->states) {
      b.add(s.x, s.y);
    }
  }
  if (scenario != nullptr) {
    for (const auto& box : scenario->boxes) {
      for (const auto& c : box.corners()) {
        b.add(c.x, c.y);
      }
    }
    for (const auto& cone : scenario->cones) {
      b.add(cone.position.x, cone.position.y);
    }
  }
  b.finish(true);
  auto out = open_svg(path);
  axes(out, b, scenario != nullptr ? "trajectory: " + scenario->name : "trajectory");

  if (scenario != nullptr) {
    for (const auto& box : scenario->boxes) {
      const double w = box.length * b.scale();
      const double h = box.width * b.scale();
      const double deg = -box.yaw * 180.0 / std::numbers::pi;
      out << "<rect x=\"" << fmt(-w / 2) << "\" y=\"" << fmt(-h / 2) << "\" width=\"" << fmt(w)
          << "\" height=\"" << fmt(h) << "\" transform=\"translate(" << fmt(b.px(box.center.x)) << ' '
          << fmt(b.py(box.center.y)) << ") rotate(" << fmt(deg)
          << ")\" fill=\"#c8a165\" stroke=\"#7a5a2a\"/>\n";
    }
    for (const auto& cone : scenario->cones) {
      out << "<circle cx=\"" << fmt(b.px(cone.position.x)) << "\" cy=\"" << fmt(b.py(cone.position.y))
          << "\" r=\"" << fmt(std::max(3.0, cone.radius * b.scale())) << "\" fill=\"#ff8c00\"/>\n";
    }
  }
  std::size_t i = 0;
  for (const auto& t : traces) {
    if (t.trace == nullptr) {
      continue;
    }
    out << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kColors[i % kColors.size()]
        << "\" points=\"";
    const auto& states = t.trace->states;
    const std::size_t stride = std::max<std::size_t>(1, states.size() / 2000);
    for (std::size_t k = 0; k < states.size(); k += stride) {
      out << fmt(b.px(states[k].x)) << ',' << fmt(b.py(states[k].y)) << ' ';
    }
    out << "\"/>\n";
    legend(out, i, t.label);
    ++i;
  }
  out << "</svg>\n";
}

void write_series_svg(const std::filesystem::path& path, const std::string& title,
                      std::span<const double> x, std::span<const Series> series) {
  Bounds b;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < std::min(x.size(), s.y.size()); ++k) {
      b.add(x[k], s.y[k]);
    }
  }
  b.finish(false);
  auto out = open_svg(path);
  axes(out, b, title);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::size_t n = std::min(x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 4000);
    out << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << kColors[i % kColors.size()]
        << "\" points=\"";
    for (std::size_t k = 0; k < n; k += stride) {
      out << fmt(b.px(x[k])) << ',' << fmt(b.py(s.y[k])) << ' ';
    }
    out << "\"/>\n";
    legend(out, i, s.label);
  }
  out << "</svg>\n";
}

void write_histogram_svg(const std::filesystem::path& path, const std::string& title,
                         const Histogram& h) {
  Bounds b;
  std::size_t peak = 1;
  for (auto c : h.counts) {
    peak = std::max(peak, c);
  }
  b.add(h.lo, 0.0);
  b.add(h.hi, static_cast<double>(peak));
  b.finish(false);
  auto out = open_svg(path);
  axes(out, b, title);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double x0 = b.px(h.bin_lo(i));
    const double x1 = b.px(h.bin_hi(i));
    const double y = b.py(static_cast<double>(h.counts[i]));
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(std::max(0.5, x1 - x0 - 0.5))
        << "\" height=\"" << fmt(b.py(0.0) - y) << "\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace ikd
