#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sse {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2d = Vec2<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  constexpr Scalar two_pi = 2 * pi;
  a = std::fmod(a, two_pi);
  if (a <= -pi) a += two_pi;
  if (a > pi) a -= two_pi;
  return a;
}

template <typename Scalar>
constexpr Scalar deg2rad(Scalar d) {
  return d * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad2deg(Scalar r) {
  return r * Scalar(180) / std::numbers::pi_v<Scalar>;
}

/// Planar pose in the map frame.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2d position() const { return {x, y}; }
  Vec2d heading() const { return {std::cos(theta), std::sin(theta)}; }
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

/// Expresses a map-frame point in the frame of `frame`.
inline Vec2d to_local(const Pose2& frame, const Vec2d& p) {
  const double c = std::cos(frame.theta), s = std::sin(frame.theta);
  const Vec2d d = p - frame.position();
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

inline Vec2d to_map(const Pose2& frame, const Vec2d& p) {
  const double c = std::cos(frame.theta), s = std::sin(frame.theta);
  return {frame.x + c * p.x() - s * p.y(), frame.y + s * p.x() + c * p.y()};
}

/// Bearing of `p` seen from `frame`, relative to its heading.
inline double bearing_from(const Pose2& frame, const Vec2d& p) {
  return wrap_angle(std::atan2(p.y() - frame.y, p.x() - frame.x) - frame.theta);
}

/// Shortest distance from `p` to the segment [a, b].
inline double distance_to_segment(const Vec2d& p, const Vec2d& a, const Vec2d& b) {
  const Vec2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

/// True when the closed segments [p1, p2] and [q1, q2] intersect.
inline bool segments_intersect(const Vec2d& p1, const Vec2d& p2, const Vec2d& q1, const Vec2d& q2) {
  auto cross = [](const Vec2d& o, const Vec2d& a, const Vec2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  auto on_segment = [](const Vec2d& a, const Vec2d& b, const Vec2d& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
  };
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace sse
