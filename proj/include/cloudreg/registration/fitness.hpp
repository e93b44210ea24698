// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/kdtree.hpp"

namespace cloudreg {

struct FitnessScore {
  double score = 0.0;          // mean squared distance over matched points, m^2
  double mean_distance = 0.0;  // mean unsquared distance, m
  std::size_t matched = 0;
};

/// Aggregates a correspondence set. Throws NoCorrespondences when empty.
inline FitnessScore score_correspondences(std::span<const Correspondence> corr) {
  if (corr.empty()) throw Error(ErrorCode::kNoCorrespondences, "no point pairs within the distance cap");
  double sq = 0.0;
  double lin = 0.0;
  for (const auto& c : corr) {
    sq += c.distance * c.distance;
    lin += c.distance;
  }
  const auto n = static_cast<double>(corr.size());
  return {sq / n, lin / n, corr.size()};
}

/// Squared-distance fitness of `source` against the indexed target, counting
/// only source points whose nearest target lies within `max_dist`.
inline FitnessScore fitness_score(const std::vector<Vec3>& source, const KdTree& target, double max_dist) {
  const auto corr = find_correspondences(source, target, max_dist);
  return score_correspondences(corr);
}

inline FitnessScore fitness_score(const PointCloud& source, const KdTree& target, double max_dist) {
  return fitness_score(source.positions(), target, max_dist);
}

}  // namespace cloudreg
