// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/filtering.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/registration.hpp"

namespace cloudreg {

/// Registration failure inside merge(); `pair_index` i names the pair
/// (cloud i-1, cloud i).
class MergeError : public Error {
 public:
  MergeError(ErrorCode code, std::size_t pair_index, const std::string& what)
      : Error(code, "pair " + std::to_string(pair_index) + " (clouds " + std::to_string(pair_index - 1) + " and " +
                        std::to_string(pair_index) + "): " + what),
        pair_index_(pair_index) {}

  std::size_t pair_index() const noexcept { return pair_index_; }

 private:
  std::size_t pair_index_;
};

struct MergeResult {
  PointCloud global_cloud;
  std::vector<RigidTransform> transforms;         // cloud i -> frame of cloud 0
  std::vector<RegistrationResult> pair_results;   // pair i-1 holds (cloud i-1 -> cloud i)
};

/// Chains FS-HICP over consecutive clouds in input order, expresses every
/// cloud in the frame of cloud 0, and voxel-downsamples the union at fine_leaf.
inline MergeResult merge(std::span<const PointCloud> clouds, const FsHicpParams& params) {
  if (clouds.size() < 2) throw Error(ErrorCode::kInvalidParams, "merge needs at least two clouds");
  MergeResult out;
  out.transforms.push_back(RigidTransform::identity());
  for (std::size_t i = 1; i < clouds.size(); ++i) {
    try {
      // Source is the earlier cloud, so the result maps cloud i-1 into cloud i.
      out.pair_results.push_back(fs_hicp(clouds[i - 1], clouds[i], params));
    } catch (const Error& e) {
      throw MergeError(e.code(), i, e.message());
    }
    out.transforms.push_back(compose(out.transforms.back(), inverse(out.pair_results.back().transform)));
  }

  bool colored = true;
  std::size_t total = 0;
  for (const auto& c : clouds) {
    colored = colored && c.has_colors();
    total += c.size();
  }
  std::vector<Vec3> points;
  std::vector<Rgb> colors;
  points.reserve(total);
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    for (std::size_t k = 0; k < clouds[i].size(); ++k) {
      points.push_back(out.transforms[i] * clouds[i][k]);
      if (colored) colors.push_back(clouds[i].colors()[k]);
    }
  }
  out.global_cloud = voxel_downsample(PointCloud(std::move(points), std::move(colors), "global"),
                                      VoxelGridSpec{params.fine_leaf});
  return out;
}

}  // namespace cloudreg
