// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "cloudreg/cloudreg.hpp"

namespace cloudreg::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  Vec3 vec(double lo = -1.0, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

  RigidTransform transform(double max_translation = 2.0) {
    Vec3 axis = vec();
    while (axis.norm() < 1e-3) axis = vec();
    return RigidTransform::from_axis_angle(axis, uniform(-std::numbers::pi, std::numbers::pi),
                                           vec(-max_translation, max_translation));
  }

  PointCloud cloud(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(vec(lo, hi));
    return PointCloud(std::move(pts));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline RigidTransform rot_z(double deg, const Vec3& t = Vec3::Zero()) {
  return RigidTransform::from_axis_angle(Vec3::UnitZ(), deg * std::numbers::pi / 180.0, t);
}

inline double max_abs_diff(const RigidTransform& a, const RigidTransform& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

/// Linear-scan nearest neighbour, lowest index on ties.
inline std::optional<Neighbor> brute_nearest(const std::vector<Vec3>& pts, const Vec3& q,
                                             double max_dist = std::numeric_limits<double>::infinity()) {
  std::optional<Neighbor> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = squared_distance(pts[i], q);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = Neighbor{i, std::sqrt(d2)};
    }
  }
  if (best && best->distance > max_dist) return std::nullopt;
  return best;
}

/// Regular grid of points on the axis-aligned planes through `origin`:
/// z = 0 floor plus x = 0 and y = 0 walls, `n` samples per edge.
inline PointCloud corner(int n, double size, const Vec3& origin = Vec3::Zero()) {
  std::vector<Vec3> pts;
  const double step = size / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = (i + 0.5) * step, b = (j + 0.5) * step;
      pts.push_back(origin + Vec3(a, b, 0));
      pts.push_back(origin + Vec3(0, a, b));
      pts.push_back(origin + Vec3(a, 0, b));
    }
  }
  return PointCloud(std::move(pts));
}

}  // namespace cloudreg::testing
