// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/kdtree.hpp"
#include "cloudreg/registration/align.hpp"
#include "cloudreg/registration/icp.hpp"
#include "cloudreg/registration/types.hpp"

namespace cloudreg {

/// Per-point unit normals from the k nearest neighbors (the point itself
/// included): the eigenvector of the smallest covariance eigenvalue.
///
/// Orientation: each normal points away from the cloud centroid. When the
/// point lies in the centroid's tangent plane (the dot product vanishes) the
/// normal's largest-magnitude component is made positive instead.
/// Neighborhoods that are coincident or collinear get (0, 0, 1).
inline std::vector<Vec3> estimate_normals(const PointCloud& c, int k) {
  if (k < 3) throw Error(ErrorCode::kInvalidParams, "normal estimation needs k >= 3");
  if (c.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "cloud has " + std::to_string(c.size()) + " points, fewer than k = " + std::to_string(k));
  }
  const KdTree tree(c);
  const Vec3 center = centroid(c);
  std::vector<Vec3> normals;
  normals.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto nbrs = tree.k_nearest(c[i], static_cast<std::size_t>(k));
    Vec3 mean = Vec3::Zero();
    for (const auto& nb : nbrs) mean += c[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& nb : nbrs) {
      const Vec3 d = c[nb.index] - mean;
      cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 ev = eig.eigenvalues();  // ascending
    if (!(ev(2) > 1e-300) || ev(1) <= 1e-10 * ev(2)) {
      normals.emplace_back(0.0, 0.0, 1.0);
      continue;
    }
    Vec3 n = eig.eigenvectors().col(0).normalized();
    const Vec3 outward = c[i] - center;
    const double dot = n.dot(outward);
    if (std::abs(dot) > 1e-12 * outward.norm()) {
      if (dot < 0.0) n = -n;
    } else {
      int axis = 0;
      n.cwiseAbs().maxCoeff(&axis);
      if (n(axis) < 0.0) n = -n;
    }
    normals.push_back(n);
  }
  return normals;
}

namespace detail {

// One linearized point-to-plane step: minimize sum (n_i . (R s_i + t - q_i))^2
// with R ~ I + [w]x, solved as 6x6 normal equations about the source centroid.
inline RigidTransform point_to_plane_step(const std::vector<Vec3>& moved, const std::vector<Vec3>& target,
                                          const std::vector<Vec3>& normals,
                                          std::span<const Correspondence> corr) {
  if (corr.size() < 6) {
    throw Error(ErrorCode::kSingularSystem, "point-to-plane step needs at least 6 pairs, got " +
                                                std::to_string(corr.size()));
  }
  Vec3 pivot = Vec3::Zero();
  for (const auto& c : corr) pivot += moved[c.source_index];
  pivot /= static_cast<double>(corr.size());

  Eigen::Matrix<double, 6, 6> ata = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> atb = Eigen::Matrix<double, 6, 1>::Zero();
  for (const auto& c : corr) {
    const Vec3 s = moved[c.source_index] - pivot;
    const Vec3 q = target[c.target_index] - pivot;
    const Vec3& n = normals[c.target_index];
    Eigen::Matrix<double, 6, 1> row;
    row << s.cross(n), n;
    ata += row * row.transpose();
    atb += row * n.dot(q - s);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(ata);
  const auto ev = eig.eigenvalues();
  if (!(ev(5) > 0.0) || ev(0) <= 1e-10 * ev(5)) {
    throw Error(ErrorCode::kSingularSystem, "point-to-plane normal equations are rank deficient");
  }
  const Eigen::Matrix<double, 6, 1> x = ata.ldlt().solve(atb);
  const Mat3 r = (Eigen::AngleAxisd(x(2), Vec3::UnitZ()) * Eigen::AngleAxisd(x(1), Vec3::UnitY()) *
                  Eigen::AngleAxisd(x(0), Vec3::UnitX()))
                     .toRotationMatrix();
  const Vec3 t = x.tail<3>();
  // Step about the pivot: p -> R (p - pivot) + pivot + t.
  return {r, pivot + t - r * pivot};
}

}  // namespace detail

/// Point-to-plane ICP against target normals estimated with
/// params.normal_neighbors neighbors. Same loop contract as point-to-point.
inline RegistrationResult icp_point_to_plane(const PointCloud& source, const PointCloud& target,
                                             const IcpParams& params,
                                             const RigidTransform& init = RigidTransform::identity(),
                                             const StepObserver& observer = {}) {
  params.validate();
  detail::require_points(source, "source");
  detail::require_points(target, "target");
  const KdTree tree(target);
  const auto normals = estimate_normals(target, params.normal_neighbors);
  const auto& tgt = target.positions();
  auto fit = [&](const std::vector<Vec3>& moved, std::span<const Correspondence> corr) {
    return detail::point_to_plane_step(moved, tgt, normals, corr);
  };
  return detail::run_single_stage(source, tree, params, init, fit, observer);
}

}  // namespace cloudreg
