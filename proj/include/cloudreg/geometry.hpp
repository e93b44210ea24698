// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cloudreg/error.hpp"

namespace cloudreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Point3 {
  Vec3 xyz = Vec3::Zero();
  std::optional<Rgb> color;
};

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

// Positions and colors are stored as parallel arrays; `colors` is either
// empty or exactly as long as `points`.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points, std::string frame_id = {})
      : points_(std::move(points)), frame_id_(std::move(frame_id)) {
    for (const auto& p : points_) check_finite(p);
  }
  PointCloud(std::vector<Vec3> points, std::vector<Rgb> colors, std::string frame_id = {})
      : points_(std::move(points)), colors_(std::move(colors)), frame_id_(std::move(frame_id)) {
    if (!colors_.empty() && colors_.size() != points_.size()) {
      throw Error(ErrorCode::kInvalidParams, "color count does not match point count");
    }
    for (const auto& p : points_) check_finite(p);
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  bool has_colors() const noexcept { return !colors_.empty(); }

  const std::vector<Vec3>& positions() const noexcept { return points_; }
  const std::vector<Rgb>& colors() const noexcept { return colors_; }
  const std::string& frame_id() const noexcept { return frame_id_; }
  void set_frame_id(std::string id) { frame_id_ = std::move(id); }

  const Vec3& operator[](std::size_t i) const { return points_[i]; }

  Point3 point(std::size_t i) const {
    Point3 p{points_.at(i), std::nullopt};
    if (has_colors()) p.color = colors_[i];
    return p;
  }

  void push_back(const Vec3& p) {
    if (has_colors()) throw Error(ErrorCode::kInvalidParams, "colored cloud needs a color");
    check_finite(p);
    points_.push_back(p);
  }
  void push_back(const Vec3& p, const Rgb& c) {
    if (!empty() && !has_colors()) {
      throw Error(ErrorCode::kInvalidParams, "uncolored cloud cannot take a color");
    }
    check_finite(p);
    points_.push_back(p);
    colors_.push_back(c);
  }
  void push_back(const Point3& p) {
    if (p.color) {
      push_back(p.xyz, *p.color);
    } else {
      push_back(p.xyz);
    }
  }
  void reserve(std::size_t n) { points_.reserve(n); }

  friend bool operator==(const PointCloud& a, const PointCloud& b) {
    return a.points_ == b.points_ && a.colors_ == b.colors_ && a.frame_id_ == b.frame_id_;
  }

 private:
  static void check_finite(const Vec3& p) {
    if (!is_finite(p)) throw Error(ErrorCode::kInvalidParams, "point has non-finite coordinate");
  }

  std::vector<Vec3> points_;
  std::vector<Rgb> colors_;
  std::string frame_id_;
};

/// Rotation + translation, p' = R p + t. Always a proper rotation.
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws InvalidTransform when R is not orthonormal with det +1 (within 1e-9).
  RigidTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {
    validate();
  }

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  static RigidTransform from_matrix(const Mat4& m) {
    if (!m.allFinite() || (m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > kTolerance) {
      throw Error(ErrorCode::kInvalidTransform, "bottom row of homogeneous matrix is not [0 0 0 1]");
    }
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  /// Rotation of `angle_rad` about `axis` (normalized internally).
  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                        const Vec3& t = Vec3::Zero()) {
    return {Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(), t};
  }

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  Vec3 operator*(const Vec3& p) const { return rotation_ * p + translation_; }

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;

 private:
  void validate() const {
    if (!rotation_.allFinite() || !translation_.allFinite()) {
      throw Error(ErrorCode::kInvalidTransform, "non-finite entry");
    }
    const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).norm();
    if (ortho > kTolerance) {
      throw Error(ErrorCode::kInvalidTransform,
                  "rotation is not orthonormal (|R^T R - I|_F = " + std::to_string(ortho) + ")");
    }
    const double det = rotation_.determinant();
    if (std::abs(det - 1.0) > kTolerance) {
      throw Error(ErrorCode::kInvalidTransform, "rotation determinant is " + std::to_string(det));
    }
  }

  Mat3 rotation_;
  Vec3 translation_;
};

inline PointCloud apply(const RigidTransform& T, const PointCloud& c) {
  std::vector<Vec3> out;
  out.reserve(c.size());
  for (const auto& p : c.positions()) out.push_back(T * p);
  return c.has_colors() ? PointCloud(std::move(out), c.colors(), c.frame_id())
                        : PointCloud(std::move(out), c.frame_id());
}

/// apply(compose(a, b), c) == apply(a, apply(b, c)).
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Mat3 r = a.rotation() * b.rotation();
  // Re-orthonormalize so long accumulation chains stay inside the 1e-9 invariant.
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = svd.matrixU() * svd.matrixV().transpose();
  return {r, a.rotation() * b.translation() + a.translation()};
}

inline RigidTransform inverse(const RigidTransform& T) {
  const Mat3 rt = T.rotation().transpose();
  return {rt, -(rt * T.translation())};
}

inline Vec3 centroid(const PointCloud& c) {
  if (c.empty()) throw Error(ErrorCode::kEmptyCloud, "centroid of an empty cloud");
  Vec3 sum = Vec3::Zero();
  for (const auto& p : c.positions()) sum += p;
  return sum / static_cast<double>(c.size());
}

/// Feature record of a keyframe: pixel location, detector response, pyramid octave.
struct KeyPoint {
  double u = 0.0;
  double v = 0.0;
  double response = 0.0;
  int octave = 0;
  friend bool operator==(const KeyPoint&, const KeyPoint&) = default;
};

/// What a robot ships to the cloud instead of raw images. All three per-feature
/// arrays have the same length.
struct KeyframePayload {
  static constexpr std::size_t kDescriptorBytes = 32;
  using Descriptor = std::array<std::uint8_t, kDescriptorBytes>;

  std::vector<KeyPoint> keypoints;
  std::vector<double> depths;  // meters
  std::vector<Descriptor> descriptors;
  double timestamp = 0.0;  // seconds since epoch

  std::size_t size() const noexcept { return keypoints.size(); }

  void validate() const {
    if (depths.size() != keypoints.size() || descriptors.size() != keypoints.size()) {
      throw Error(ErrorCode::kInvalidParams,
                  "keyframe arrays differ in length (keypoints " + std::to_string(keypoints.size()) +
                      ", depths " + std::to_string(depths.size()) + ", descriptors " +
                      std::to_string(descriptors.size()) + ")");
    }
  }

  friend bool operator==(const KeyframePayload&, const KeyframePayload&) = default;
};

}  // namespace cloudreg
