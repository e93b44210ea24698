// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/kdtree.hpp"
#include "cloudreg/registration/align.hpp"
#include "cloudreg/registration/rigid_fit.hpp"
#include "cloudreg/registration/types.hpp"

namespace cloudreg {

namespace detail {

inline void require_points(const PointCloud& c, const char* which) {
  if (c.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry,
                std::string(which) + " cloud needs at least 3 points, has " + std::to_string(c.size()));
  }
}

}  // namespace detail

/// Classic point-to-point ICP: match within max_corr_dist, fit by SVD, move,
/// repeat. Stops on the fitness threshold, on a relative fitness change below
/// convergence_rel_change, or after max_iterations (not converged).
inline RegistrationResult icp_point_to_point(const PointCloud& source, const PointCloud& target,
                                             const IcpParams& params,
                                             const RigidTransform& init = RigidTransform::identity(),
                                             const StepObserver& observer = {}) {
  params.validate();
  detail::require_points(source, "source");
  detail::require_points(target, "target");
  const KdTree tree(target);
  const auto& tgt = target.positions();
  auto fit = [&](const std::vector<Vec3>& moved, std::span<const Correspondence> corr) {
    return best_rigid_fit(moved, tgt, corr);
  };
  return detail::run_single_stage(source, tree, params, init, fit, observer);
}

}  // namespace cloudreg
