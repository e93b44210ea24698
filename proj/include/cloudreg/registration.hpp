// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <string_view>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/registration/fitness.hpp"
#include "cloudreg/registration/fs_hicp.hpp"
#include "cloudreg/registration/icp.hpp"
#include "cloudreg/registration/point_to_plane.hpp"
#include "cloudreg/registration/rigid_fit.hpp"
#include "cloudreg/registration/types.hpp"

namespace cloudreg {

enum class Algorithm { kPointToPoint, kPointToPlane, kFsHicp };

inline constexpr std::array<Algorithm, 3> kAllAlgorithms = {Algorithm::kPointToPoint, Algorithm::kPointToPlane,
                                                            Algorithm::kFsHicp};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPointToPoint: return "point-to-point";
    case Algorithm::kPointToPlane: return "point-to-plane";
    case Algorithm::kFsHicp: return "fs-hicp";
  }
  return "?";
}

/// Accepts the dashed CLI spelling and the underscored one.
inline Algorithm parse_algorithm(std::string_view name) {
  for (const auto a : kAllAlgorithms) {
    std::string dashed(to_string(a));
    std::string underscored = dashed;
    for (auto& ch : underscored) {
      if (ch == '-') ch = '_';
    }
    if (name == dashed || name == underscored) return a;
  }
  throw Error(ErrorCode::kUnknownAlgorithm, "unknown algorithm '" + std::string(name) + "'");
}

struct RegistrationConfig {
  IcpParams icp;      // point-to-point and point-to-plane
  FsHicpParams fs;    // fs-hicp
  RigidTransform init;  // initial guess for the classic engines
};

inline RegistrationResult register_with(Algorithm algorithm, const PointCloud& source, const PointCloud& target,
                                        const RegistrationConfig& config, const StepObserver& observer = {}) {
  switch (algorithm) {
    case Algorithm::kPointToPoint: return icp_point_to_point(source, target, config.icp, config.init, observer);
    case Algorithm::kPointToPlane: return icp_point_to_plane(source, target, config.icp, config.init, observer);
    case Algorithm::kFsHicp: return fs_hicp(source, target, config.fs, observer);
  }
  throw Error(ErrorCode::kUnknownAlgorithm, "unhandled algorithm");
}

inline RegistrationResult register_with(std::string_view algorithm, const PointCloud& source,
                                        const PointCloud& target, const RegistrationConfig& config,
                                        const StepObserver& observer = {}) {
  return register_with(parse_algorithm(algorithm), source, target, config, observer);
}

}  // namespace cloudreg
