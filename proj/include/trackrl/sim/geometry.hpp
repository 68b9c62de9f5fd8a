#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

namespace trackrl::sim {

struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.z}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.z - a.z * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.z, s * v.x + c * v.z};
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

// A segment swept by a disk of the given radius.
struct Capsule {
  Vec2 a;
  Vec2 b;
  double radius = 0.0;
};

constexpr double kNoConstraint = -std::numeric_limits<double>::infinity();

// Smallest upward offset z such that `capsule` translated by (0, z) does not
// overlap `seg`, or kNoConstraint if no vertical offset ever makes them touch.
//
// The offsets at which they touch form the Minkowski set
// (seg - axis) + disk(r); the answer is the top of that convex set on the
// line x = 0. The upper boundary of the parallelogram (seg - axis) is
// concave piecewise linear, so each piece is maximised in closed form.
inline double lift_to_clear(const Capsule& capsule, const Segment& seg) {
  const double r = capsule.radius;
  std::array<Vec2, 4> pts{seg.a - capsule.a, seg.a - capsule.b, seg.b - capsule.a,
                          seg.b - capsule.b};
  double lo = pts[0].x, hi = pts[0].x;
  for (const auto& p : pts) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  if (lo > r || hi < -r) return kNoConstraint;

  std::sort(pts.begin(), pts.end(), [](Vec2 p, Vec2 q) {
    return p.x < q.x || (p.x == q.x && p.z < q.z);
  });
  // Keep the highest point per distinct x, then take the upper hull.
  std::array<Vec2, 4> uniq{};
  std::size_t n = 0;
  for (const auto& p : pts) {
    if (n > 0 && uniq[n - 1].x == p.x) {
      uniq[n - 1] = p;
    } else {
      uniq[n++] = p;
    }
  }
  std::array<Vec2, 4> hull{};
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (h >= 2 && cross(hull[h - 1] - hull[h - 2], uniq[i] - hull[h - 2]) >= 0.0) --h;
    hull[h++] = uniq[i];
  }

  double best = kNoConstraint;
  auto consider = [&](double u, double top) {
    if (u < -r || u > r) return;
    const double rr = std::max(0.0, r * r - u * u);
    best = std::max(best, top + std::sqrt(rr));
  };
  for (std::size_t i = 0; i < h; ++i) consider(hull[i].x, hull[i].z);
  for (std::size_t i = 0; i + 1 < h; ++i) {
    const Vec2 p = hull[i];
    const Vec2 q = hull[i + 1];
    const double u0 = std::max(p.x, -r);
    const double u1 = std::min(q.x, r);
    if (u0 > u1) continue;
    const double k = (q.z - p.z) / (q.x - p.x);
    const double stationary = k * r / std::sqrt(1.0 + k * k);
    const double u = std::clamp(stationary, u0, u1);
    consider(u, p.z + k * (u - p.x));
  }
  return best;
}

// Distance along a unit-direction ray to the first hit on `seg`.
inline std::optional<double> ray_hit(Vec2 origin, Vec2 dir, const Segment& seg) {
  const Vec2 e = seg.b - seg.a;
  const double denom = cross(dir, e);
  if (denom == 0.0) return std::nullopt;
  const Vec2 w = seg.a - origin;
  const double t = cross(w, e) / denom;
  const double s = cross(w, dir) / denom;
  if (t <= 0.0 || s < 0.0 || s > 1.0) return std::nullopt;
  return t;
}

inline std::optional<double> ray_cast(Vec2 origin, Vec2 dir, std::span<const Segment> segs) {
  std::optional<double> best;
  for (const auto& seg : segs) {
    if (auto t = ray_hit(origin, dir, seg); t && (!best || *t < *best)) best = t;
  }
  return best;
}

}  // namespace trackrl::sim
