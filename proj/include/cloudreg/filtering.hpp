// SPDX-License-Identifier: Apache-2.0
//
// Invalid-depth rejection and voxel-grid downsampling.
//
// Raw depth arrives in sensor millimeters; the 0 / > 7000 rejection rule is
// applied on those raw values and everything downstream is in meters.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"

namespace cloudreg {

inline constexpr double kMaxValidDepthMm = 7000.0;

/// true = valid. Entries equal to 0 or greater than 7000 mm are invalid.
inline std::vector<bool> reject_invalid_depth(std::span<const double> depths_mm) {
  std::vector<bool> mask(depths_mm.size());
  for (std::size_t i = 0; i < depths_mm.size(); ++i) {
    const double d = depths_mm[i];
    mask[i] = d != 0.0 && !(d > kMaxValidDepthMm) && std::isfinite(d);
  }
  return mask;
}

inline double millimeters_to_meters(double mm) { return mm * 1e-3; }

struct PinholeIntrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
};

/// Back-projects a row-major depth image (millimeters) into a camera-frame
/// cloud, dropping invalid pixels.
inline PointCloud depth_image_to_cloud(std::span<const double> depths_mm, std::size_t width,
                                       const PinholeIntrinsics& k) {
  if (width == 0 || depths_mm.size() % width != 0) {
    throw Error(ErrorCode::kInvalidParams, "depth buffer is not a whole number of rows");
  }
  const auto mask = reject_invalid_depth(depths_mm);
  PointCloud cloud;
  for (std::size_t i = 0; i < depths_mm.size(); ++i) {
    if (!mask[i]) continue;
    const double z = millimeters_to_meters(depths_mm[i]);
    const double u = static_cast<double>(i % width);
    const double v = static_cast<double>(i / width);
    cloud.push_back(Vec3((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z));
  }
  return cloud;
}

/// Drops points sitting exactly at the sensor origin, which is where a zero
/// depth reading lands after back-projection.
inline PointCloud reject_invalid_points(const PointCloud& c) {
  PointCloud out;
  out.set_frame_id(c.frame_id());
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].isZero(0.0)) continue;
    out.push_back(c.point(i));
  }
  return out;
}

struct VoxelGridSpec {
  double leaf = 0.1;  // meters

  void validate() const {
    if (!(leaf > 0.0) || !std::isfinite(leaf)) {
      throw Error(ErrorCode::kInvalidLeaf, "voxel leaf must be positive and finite, got " + std::to_string(leaf));
    }
  }
};

using VoxelKey = std::array<std::int64_t, 3>;

inline VoxelKey voxel_key(const Vec3& p, double leaf) {
  return {static_cast<std::int64_t>(std::floor(p.x() / leaf)),
          static_cast<std::int64_t>(std::floor(p.y() / leaf)),
          static_cast<std::int64_t>(std::floor(p.z() / leaf))};
}

/// One centroid per occupied voxel; output in ascending (x, y, z) key order.
/// Keys are floor(p / leaf) anchored at the origin.
inline PointCloud voxel_downsample(const PointCloud& c, const VoxelGridSpec& spec) {
  spec.validate();
  const std::size_t n = c.size();
  std::vector<VoxelKey> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = voxel_key(c[i], spec.leaf);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] < keys[b] || (keys[a] == keys[b] && a < b);
  });

  std::vector<Vec3> points;
  std::vector<Rgb> colors;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    Vec3 sum = Vec3::Zero();
    std::array<std::uint64_t, 3> rgb{0, 0, 0};
    while (j < n && keys[order[j]] == keys[order[i]]) {
      sum += c[order[j]];
      if (c.has_colors()) {
        const auto& col = c.colors()[order[j]];
        rgb[0] += col.r;
        rgb[1] += col.g;
        rgb[2] += col.b;
      }
      ++j;
    }
    const auto count = static_cast<double>(j - i);
    points.push_back(sum / count);
    if (c.has_colors()) {
      const auto avg = [&](std::uint64_t s) {
        return static_cast<std::uint8_t>(std::lround(static_cast<double>(s) / count));
      };
      colors.push_back({avg(rgb[0]), avg(rgb[1]), avg(rgb[2])});
    }
    i = j;
  }
  return PointCloud(std::move(points), std::move(colors), c.frame_id());
}

}  // namespace cloudreg
