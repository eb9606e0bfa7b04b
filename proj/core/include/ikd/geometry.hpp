#pragma once

#include <array>
#include <cmath>

namespace ikd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Rectangle of `length` along its yaw axis and `width` across it.
struct OrientedBox {
  Vec2 center;
  double length = 0.0;
  double width = 0.0;
  double yaw = 0.0;

  std::array<Vec2, 4> corners() const;
  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;
};

/// Negative inside the box (depth to the nearest edge), Euclidean distance outside.
double signed_distance(const OrientedBox& box, Vec2 p);

/// Separation distance when apart, minus the minimum penetration depth when overlapping.
double signed_distance(const OrientedBox& a, const OrientedBox& b);

Vec2 closest_point(const OrientedBox& box, Vec2 p);

/// Closed-segment intersection test.
bool segments_intersect(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2);

}  // namespace ikd
