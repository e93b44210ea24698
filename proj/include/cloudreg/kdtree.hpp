// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"

namespace cloudreg {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;  // meters
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct Correspondence {
  std::size_t source_index = 0;
  std::size_t target_index = 0;
  double distance = 0.0;  // meters
  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// Balanced k-d tree over a snapshot of a cloud's positions.
///
/// Nodes split at the median of the widest bounding-box axis. Query results
/// are exactly those of a linear scan: the smallest squared distance wins and
/// ties go to the lowest point index.
class KdTree {
 public:
  static constexpr std::size_t kDefaultLeafSize = 16;

  explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = kDefaultLeafSize)
      : points_(cloud.positions()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    if (points_.empty()) throw Error(ErrorCode::kEmptyCloud, "cannot index an empty cloud");
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, order_.size());
  }

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Vec3>& points() const noexcept { return points_; }

  /// Closest indexed point if it lies within `max_dist` (inclusive).
  std::optional<Neighbor> nearest_within(const Vec3& q, double max_dist) const {
    if (!(max_dist > 0.0) || !std::isfinite(max_dist)) {
      throw Error(ErrorCode::kInvalidDistance, "max distance must be positive and finite, got " +
                                                   std::to_string(max_dist));
    }
    Best best{max_dist * max_dist, kNone};
    search(0, q, best);
    if (best.index == kNone) return std::nullopt;
    return Neighbor{best.index, std::sqrt(best.d2)};
  }

  /// Closest indexed point with no distance cap.
  Neighbor nearest(const Vec3& q) const {
    Best best{std::numeric_limits<double>::infinity(), kNone};
    search(0, q, best);
    return {best.index, std::sqrt(best.d2)};
  }

  /// The k closest points ordered by (distance, index).
  std::vector<Neighbor> k_nearest(const Vec3& q, std::size_t k) const {
    k = std::min(k, points_.size());
    std::vector<Neighbor> out;
    if (k == 0) return out;
    Heap heap;
    search_k(0, q, k, heap);
    out.resize(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
      out[i] = {heap.top().second, std::sqrt(heap.top().first)};
      heap.pop();
    }
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;  // -1 marks a leaf
    std::int32_t right = -1;
    int dim = 0;
    double split = 0.0;
  };

  struct Best {
    double d2;
    std::size_t index;
  };

  using Entry = std::pair<double, std::size_t>;  // (squared distance, index); lexicographic
  using Heap = std::priority_queue<Entry>;

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= leaf_size_) return id;

    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int dim = 0;
    (hi - lo).maxCoeff(&dim);

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = points_[a][dim];
                       const double cb = points_[b][dim];
                       return ca < cb || (ca == cb && a < b);
                     });
    const double split = points_[order_[mid]][dim];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    nodes_[id].dim = dim;
    nodes_[id].split = split;
    return id;
  }

  void search(int id, const Vec3& q, Best& best) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        const double d2 = squared_distance(q, points_[idx]);
        if (d2 < best.d2 || (d2 == best.d2 && idx < best.index)) best = {d2, idx};
      }
      return;
    }
    const double diff = q[n.dim] - n.split;
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search(near, q, best);
    // `<=` keeps equal-distance candidates with a lower index reachable.
    if (diff * diff <= best.d2) search(far, q, best);
  }

  void search_k(int id, const Vec3& q, std::size_t k, Heap& heap) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Entry e{squared_distance(q, points_[order_[i]]), order_[i]};
        if (heap.size() < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      return;
    }
    const double diff = q[n.dim] - n.split;
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search_k(near, q, k, heap);
    if (heap.size() < k || diff * diff <= heap.top().first) search_k(far, q, k, heap);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

inline std::optional<Neighbor> nearest_within(const KdTree& tree, const Vec3& q, double max_dist) {
  return tree.nearest_within(q, max_dist);
}

/// Nearest target for every source point within `max_dist`, in source order.
/// An infinite `max_dist` disables the cap.
inline std::vector<Correspondence> find_correspondences(const std::vector<Vec3>& source,
                                                        const KdTree& target, double max_dist) {
  if (!(max_dist > 0.0)) {
    throw Error(ErrorCode::kInvalidDistance, "max distance must be positive, got " + std::to_string(max_dist));
  }
  std::vector<Correspondence> out;
  out.reserve(source.size());
  const bool capped = !std::isinf(max_dist);
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (capped) {
      if (const auto nb = target.nearest_within(source[i], max_dist)) {
        out.push_back({i, nb->index, nb->distance});
      }
    } else {
      const auto nb = target.nearest(source[i]);
      out.push_back({i, nb.index, nb.distance});
    }
  }
  return out;
}

}  // namespace cloudreg
