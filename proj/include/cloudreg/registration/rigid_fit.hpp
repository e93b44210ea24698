// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/SVD>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/kdtree.hpp"

namespace cloudreg {

struct PointPair {
  Vec3 source;
  Vec3 target;
};

namespace detail {

// Least-squares rigid motion taking each source(i) onto target(i), with
// centroids removed and the SVD of the 3x3 cross-covariance sign-corrected
// so the result is never a reflection.
template <typename SourceAt, typename TargetAt>
RigidTransform fit_rigid(std::size_t n, SourceAt source, TargetAt target) {
  if (n < 3) {
    throw Error(ErrorCode::kDegenerateGeometry, "need at least 3 point pairs, got " + std::to_string(n));
  }
  Vec3 cs = Vec3::Zero();
  Vec3 ct = Vec3::Zero();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cs += source(i);
    ct += target(i);
    scale += source(i).squaredNorm() + target(i).squaredNorm();
  }
  cs /= static_cast<double>(n);
  ct /= static_cast<double>(n);

  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) h += (source(i) - cs) * (target(i) - ct).transpose();

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (scale == 0.0 || sv(0) <= 1e-20 * scale || sv(1) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::kDegenerateGeometry, "point pairs are coincident or collinear");
  }
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = v * d * u.transpose();
  return {r, ct - r * cs};
}

}  // namespace detail

/// argmin over (R, t) of sum |target_i - (R source_i + t)|^2.
inline RigidTransform best_rigid_fit(std::span<const PointPair> pairs) {
  return detail::fit_rigid(
      pairs.size(), [&](std::size_t i) -> const Vec3& { return pairs[i].source; },
      [&](std::size_t i) -> const Vec3& { return pairs[i].target; });
}

/// Same fit, reading the pairs through a correspondence list.
inline RigidTransform best_rigid_fit(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                                     std::span<const Correspondence> corr) {
  return detail::fit_rigid(
      corr.size(), [&](std::size_t i) -> const Vec3& { return source[corr[i].source_index]; },
      [&](std::size_t i) -> const Vec3& { return target[corr[i].target_index]; });
}

}  // namespace cloudreg
