#include "ikd/geometry.hpp"

#include <algorithm>
#include <limits>

namespace ikd {
namespace {

Vec2 to_local(const OrientedBox& box, Vec2 p) {
  const Vec2 d = p - box.center;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Vec2 to_world(const OrientedBox& box, Vec2 local) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return box.center + Vec2{c * local.x - s * local.y, s * local.x + c * local.y};
}

// Overlap of the two boxes' projections onto `axis` (negative when separated).
double projected_overlap(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b, Vec2 axis) {
  double a_lo = std::numeric_limits<double>::infinity();
  double a_hi = -a_lo;
  double b_lo = a_lo;
  double b_hi = -a_lo;
  for (const auto& p : a) {
    const double d = dot(p, axis);
    a_lo = std::min(a_lo, d);
    a_hi = std::max(a_hi, d);
  }
  for (const auto& p : b) {
    const double d = dot(p, axis);
    b_lo = std::min(b_lo, d);
    b_hi = std::max(b_hi, d);
  }
  return std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  const double tol = 1e-12 * (norm(b - a) * norm(c - a) + 1e-300);
  if (v > tol) {
    return 1;
  }
  if (v < -tol) {
    return -1;
  }
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

std::array<Vec2, 4> OrientedBox::corners() const {
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {to_world(*this, {hl, hw}), to_world(*this, {-hl, hw}), to_world(*this, {-hl, -hw}),
          to_world(*this, {hl, -hw})};
}

double signed_distance(const OrientedBox& box, Vec2 p) {
  const Vec2 local = to_local(box, p);
  const double dx = std::abs(local.x) - 0.5 * box.length;
  const double dy = std::abs(local.y) - 0.5 * box.width;
  if (dx > 0.0 || dy > 0.0) {
    return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
  }
  return std::max(dx, dy);
}

double signed_distance(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes{Vec2{std::cos(a.yaw), std::sin(a.yaw)},
                                 Vec2{-std::sin(a.yaw), std::cos(a.yaw)},
                                 Vec2{std::cos(b.yaw), std::sin(b.yaw)},
                                 Vec2{-std::sin(b.yaw), std::cos(b.yaw)}};
  double min_overlap = std::numeric_limits<double>::infinity();
  bool separated = false;
  for (const auto& axis : axes) {
    const double o = projected_overlap(ca, cb, axis);
    if (o < 0.0) {
      separated = true;
    }
    min_overlap = std::min(min_overlap, o);
  }
  if (!separated) {
    return -min_overlap;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : ca) {
    best = std::min(best, signed_distance(b, p));
  }
  for (const auto& p : cb) {
    best = std::min(best, signed_distance(a, p));
  }
  return best;
}

Vec2 closest_point(const OrientedBox& box, Vec2 p) {
  Vec2 local = to_local(box, p);
  local.x = std::clamp(local.x, -0.5 * box.length, 0.5 * box.length);
  local.y = std::clamp(local.y, -0.5 * box.width, 0.5 * box.width);
  return to_world(box, local);
}

bool segments_intersect(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2) {
  const int o1 = orientation(a1, a2, b1);
  const int o2 = orientation(a1, a2, b2);
  const int o3 = orientation(b1, b2, a1);
  const int o4 = orientation(b1, b2, a2);
  if (o1 != o2 && o3 != o4) {
    return true;
  }
  return (o1 == 0 && on_segment(a1, a2, b1)) || (o2 == 0 && on_segment(a1, a2, b2)) ||
         (o3 == 0 && on_segment(b1, b2, a1)) || (o4 == 0 && on_segment(b1, b2, a2));
}

}  // namespace ikd
