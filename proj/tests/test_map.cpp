// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "cloudreg/synthetic.hpp"
#include "support.hpp"

namespace cloudreg {
namespace {

using testing::Rng;

TEST(Merge, IdenticalClouds) {
  const auto pair = synthetic::make_pair({}, 1);
  const std::vector<PointCloud> clouds = {pair.target, pair.target};
  const auto m = merge(clouds, FsHicpParams{});
  ASSERT_EQ(m.transforms.size(), 2u);
  EXPECT_EQ(m.transforms[0], RigidTransform::identity());
  EXPECT_LT(testing::max_abs_diff(m.transforms[1], RigidTransform::identity()), 1e-6);
  EXPECT_LE(m.global_cloud.size(), 2 * voxel_downsample(pair.target, {0.05}).size());
  EXPECT_EQ(m.pair_results.size(), 1u);
}

TEST(Merge, NeedsTwoClouds) {
  const std::vector<PointCloud> one = {Rng(2).cloud(10)};
  EXPECT_THROW(merge(one, FsHicpParams{}), Error);
}

TEST(Merge, ZeroOverlapNamesThePair) {
  Rng rng(3);
  const PointCloud a = rng.cloud(300);
  const std::vector<PointCloud> clouds = {a, a, apply(RigidTransform::from_translation({40, 0, 0}), a)};
  try {
    merge(clouds, FsHicpParams{});
    FAIL();
  } catch (const MergeError& e) {
    EXPECT_EQ(e.pair_index(), 2u);
    EXPECT_EQ(e.code(), ErrorCode::kNoCorrespondences);
    EXPECT_NE(std::string(e.what()).find("pair 2 (clouds 1 and 2)"), std::string::npos) << e.what();
  }
}

void expect_recovered(const synthetic::QuadrantSet& set, const MergeResult& m) {
  for (std::size_t i = 1; i < set.poses.size(); ++i) {
    const auto e = transform_error(set.poses[i], m.transforms[i]);
    EXPECT_LT(e.rotation_angle_error, 2.0) << "view " << i;
    EXPECT_LT(e.translation_error, 0.05) << "view " << i;
  }
}

// Pairs (over seeds 500..509, views posed within 10 deg / 0.2 m) whose
// registered transform lands within 2 deg / 0.05 m of the truth.
int recovered_pairs(double overlap) {
  int ok = 0;
  for (std::uint64_t seed = 500; seed < 510; ++seed) {
    const auto set = synthetic::make_quadrants(1000, overlap, 0.005, 10, 0.2, seed);
    const auto m = merge(set.clouds, FsHicpParams{});
    for (std::size_t i = 1; i < 4; ++i) {
      const auto e = transform_error(compose(inverse(set.poses[i]), set.poses[i - 1]), m.pair_results[i - 1].transform);
      ok += e.rotation_angle_error < 2.0 && e.translation_error < 0.05;
    }
  }
  return ok;
}

TEST(Merge, QuadrantChainRecoversPoses) {
  for (const std::uint64_t seed : {502, 503, 504}) {
    const auto set = synthetic::make_quadrants(1000, 0.5, 0.005, 10, 0.2, seed);
    const auto m = merge(set.clouds, FsHicpParams{});
    ASSERT_EQ(m.transforms.size(), 4u);
    expect_recovered(set, m);
  }
}

TEST(Merge, QuadrantPairRecoveryRate) {
  // Measured 26/30 at half overlap and 16/30 at 30% overlap. The coarse
  // stage keeps aligning until fitness halves, which drags pairs with a
  // narrow shared strip off the true pose.
  EXPECT_GE(recovered_pairs(0.5), 24);
  EXPECT_GE(recovered_pairs(0.3), 14);
}

TEST(Merge, FrameConsistency) {
  const auto set = synthetic::make_quadrants(1000, 0.5, 0.005, 10, 0.2, 600);
  const auto m = merge(set.clouds, FsHicpParams{});
  const KdTree global(m.global_cloud);
  for (std::size_t i = 0; i < set.clouds.size(); ++i) {
    const auto moved = apply(m.transforms[i], set.clouds[i]);
    std::size_t near = 0;
    for (const auto& p : moved.positions()) near += global.nearest_within(p, 0.1).has_value();
    EXPECT_GE(static_cast<double>(near), 0.9 * static_cast<double>(moved.size())) << "cloud " << i;
  }
}

// --- octree ----------------------------------------------------------------

TEST(Octree, OneCellHoldsAllPoints) {
  Rng rng(4);
  const auto m = to_octree(rng.cloud(1000, 0.01, 0.04), 0.05);
  ASSERT_EQ(m.leaf_count(), 1u);
  EXPECT_EQ(m.leaves[0].weight, 1000u);
  EXPECT_EQ(m.depth(), 0);
}

TEST(Octree, CubeCorners) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  const auto m = to_octree(PointCloud(pts), 1.0);
  EXPECT_EQ(m.leaf_count(), 8u);
  EXPECT_EQ(m.depth(), 2);  // keys span -1..1 on each axis
}

TEST(Octree, WeightsAndOrdering) {
  Rng rng(5);
  const PointCloud c = rng.cloud(20000, -2, 2);
  const auto m = to_octree(c, 0.1);
  EXPECT_LE(m.leaf_count(), c.size());
  EXPECT_EQ(m.total_weight(), c.size());
  for (std::size_t i = 1; i < m.leaves.size(); ++i) EXPECT_LT(m.leaves[i - 1].key, m.leaves[i].key);
}

TEST(Octree, InvalidResolution) {
  for (const double r : {0.0, -1.0, std::numeric_limits<double>::quiet_NaN()}) {
    try {
      to_octree(PointCloud{}, r);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidResolution);
    }
  }
  const PointCloud far(std::vector<Vec3>{Vec3(1e9, 0, 0)});
  EXPECT_THROW(to_octree(far, 1e-3), Error);
}

TEST(OctreeFile, EmptyRoundTrip) {
  OctreeMap m;
  m.resolution = 0.25;
  const std::string bytes = serialize_octree(m);
  EXPECT_EQ(bytes.size(), kOctreeHeaderBytes);
  EXPECT_EQ(parse_octree(bytes), m);
}

TEST(OctreeFile, RandomMapRoundTripIsByteStable) {
  Rng rng(6);
  const auto m = to_octree(rng.cloud(40000, -30, 30), 0.5);
  ASSERT_GE(m.leaf_count(), 10000u);
  const std::string bytes = serialize_octree(m);
  EXPECT_EQ(bytes.size(), kOctreeHeaderBytes + kOctreeLeafBytes * m.leaf_count());
  const auto back = parse_octree(bytes);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_octree(back), bytes);
}

TEST(OctreeFile, LittleEndianLayout) {
  OctreeMap m;
  m.resolution = 1.0;
  m.leaves.push_back({{-1, 2, 3}, 258});
  const std::string b = serialize_octree(m);
  EXPECT_EQ(b.substr(0, 4), "OCT1");
  EXPECT_EQ(static_cast<unsigned char>(b[12]), 1u);  // count
  EXPECT_EQ(static_cast<unsigned char>(b[20]), 0xFFu);  // -1
  EXPECT_EQ(static_cast<unsigned char>(b[24]), 2u);
  EXPECT_EQ(static_cast<unsigned char>(b[32]), 2u);  // 258 = 0x0102
  EXPECT_EQ(static_cast<unsigned char>(b[33]), 1u);
}

TEST(OctreeFile, MalformedInputs) {
  OctreeMap m;
  m.resolution = 0.1;
  m.leaves = {{{0, 0, 0}, 1}, {{0, 0, 1}, 2}};
  const std::string good = serialize_octree(m);
  auto expect_malformed = [](const std::string& bytes, const char* offset) {
    try {
      parse_octree(bytes);
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedFile);
      EXPECT_NE(std::string(e.what()).find(std::string("byte offset ") + offset), std::string::npos) << e.what();
    }
  };
  expect_malformed("", "0");
  expect_malformed("OCT2" + good.substr(4), "0");
  expect_malformed(good.substr(0, 10), "10");
  expect_malformed(good.substr(0, good.size() - 1), "36");
  expect_malformed(good + "x", "52");
  std::string zero = good;
  zero[48] = zero[49] = zero[50] = zero[51] = 0;
  expect_malformed(zero, "48");
  std::string unsorted = good;
  std::swap_ranges(unsorted.begin() + 20, unsorted.begin() + 36, unsorted.begin() + 36);
  expect_malformed(unsorted, "36");
  std::string huge = good;
  huge[19] = static_cast<char>(0x7F);
  expect_malformed(huge, "52");
}

}  // namespace
}  // namespace cloudreg
