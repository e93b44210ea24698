// SPDX-License-Identifier: Apache-2.0
//
// Occupancy octree stored as its sorted leaf level.
//
// Binary layout (little-endian):
//   offset 0   "OCT1"
//   offset 4   resolution, IEEE-754 double
//   offset 12  leaf count, uint64
//   offset 20  per leaf: key x, y, z as int32, then weight as uint32
// Leaves appear in strictly ascending (x, y, z) order. The tree above the
// leaves is implicit: depth() levels of halving cover the leaf bounding box.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"

namespace cloudreg {

using CellKey = std::array<std::int32_t, 3>;

struct OctreeLeaf {
  CellKey key{};
  std::uint32_t weight = 0;  // number of points in the cell
  friend bool operator==(const OctreeLeaf&, const OctreeLeaf&) = default;
};

struct OctreeMap {
  double resolution = 0.05;        // meters, leaf edge
  std::vector<OctreeLeaf> leaves;  // ascending key order, unique keys

  std::size_t leaf_count() const noexcept { return leaves.size(); }

  std::uint64_t total_weight() const {
    std::uint64_t w = 0;
    for (const auto& l : leaves) w += l.weight;
    return w;
  }

  /// Levels needed above the leaves so the root cell spans every leaf key.
  int depth() const {
    if (leaves.empty()) return 0;
    CellKey lo = leaves.front().key;
    CellKey hi = lo;
    for (const auto& l : leaves) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], l.key[a]);
        hi[a] = std::max(hi[a], l.key[a]);
      }
    }
    std::uint64_t span = 1;
    for (int a = 0; a < 3; ++a) {
      span = std::max<std::uint64_t>(span, static_cast<std::uint64_t>(std::int64_t{hi[a]} - lo[a]) + 1);
    }
    return static_cast<int>(std::bit_width(std::bit_ceil(span)) - 1);
  }

  friend bool operator==(const OctreeMap&, const OctreeMap&) = default;
};

inline OctreeMap to_octree(const PointCloud& c, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::kInvalidResolution, "octree resolution must be positive, got " + std::to_string(resolution));
  }
  std::map<CellKey, std::uint32_t> cells;
  constexpr double lo = std::numeric_limits<std::int32_t>::min();
  constexpr double hi = std::numeric_limits<std::int32_t>::max();
  for (const auto& p : c.positions()) {
    CellKey key{};
    for (int a = 0; a < 3; ++a) {
      const double k = std::floor(p[a] / resolution);
      if (k < lo || k > hi) {
        throw Error(ErrorCode::kInvalidResolution, "cell key exceeds int32 range at resolution " + std::to_string(resolution));
      }
      key[a] = static_cast<std::int32_t>(k);
    }
    ++cells[key];
  }
  OctreeMap m;
  m.resolution = resolution;
  m.leaves.reserve(cells.size());
  for (const auto& [key, weight] : cells) m.leaves.push_back({key, weight});
  return m;
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

[[noreturn]] inline void malformed_at(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, what + " at byte offset " + std::to_string(offset));
}

}  // namespace detail

inline constexpr std::size_t kOctreeHeaderBytes = 20;
inline constexpr std::size_t kOctreeLeafBytes = 16;

inline std::string serialize_octree(const OctreeMap& m) {
  std::string out;
  out.reserve(kOctreeHeaderBytes + m.leaves.size() * kOctreeLeafBytes);
  out += "OCT1";
  detail::put_u64(out, std::bit_cast<std::uint64_t>(m.resolution));
  detail::put_u64(out, m.leaves.size());
  for (const auto& l : m.leaves) {
    for (const auto k : l.key) detail::put_u32(out, static_cast<std::uint32_t>(k));
    detail::put_u32(out, l.weight);
  }
  return out;
}

inline OctreeMap parse_octree(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 4 || std::memcmp(p, "OCT1", 4) != 0) detail::malformed_at(0, "missing OCT1 magic");
  if (n < kOctreeHeaderBytes) detail::malformed_at(n, "truncated header");
  OctreeMap m;
  m.resolution = std::bit_cast<double>(detail::get_u64(p + 4));
  if (!(m.resolution > 0.0) || !std::isfinite(m.resolution)) detail::malformed_at(4, "non-positive resolution");
  const std::uint64_t count = detail::get_u64(p + 12);
  const std::size_t body = n - kOctreeHeaderBytes;
  if (count > body / kOctreeLeafBytes) {
    detail::malformed_at(kOctreeHeaderBytes + (body / kOctreeLeafBytes) * kOctreeLeafBytes,
                         "truncated leaf table (" + std::to_string(count) + " leaves declared)");
  }
  if (body != count * kOctreeLeafBytes) {
    detail::malformed_at(kOctreeHeaderBytes + count * kOctreeLeafBytes, "trailing bytes after leaf table");
  }
  m.leaves.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t off = kOctreeHeaderBytes + i * kOctreeLeafBytes;
    auto& leaf = m.leaves[i];
    for (int a = 0; a < 3; ++a) leaf.key[a] = static_cast<std::int32_t>(detail::get_u32(p + off + 4 * a));
    leaf.weight = detail::get_u32(p + off + 12);
    if (leaf.weight == 0) detail::malformed_at(off + 12, "zero leaf weight");
    if (i > 0 && !(m.leaves[i - 1].key < leaf.key)) detail::malformed_at(off, "leaf keys not strictly ascending");
  }
  return m;
}

}  // namespace cloudreg
