// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "cloudreg/synthetic.hpp"
#include "support.hpp"

#ifndef CLOUDREG_SCENARIO_DIR
#error "CLOUDREG_SCENARIO_DIR must point at the shipped scenarios"
#endif

namespace cloudreg {
namespace {

using testing::Rng;

// --- transform error -------------------------------------------------------

TEST(TransformError, PerfectEstimateIsMinusOne) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto T = rng.transform();
    const auto e = transform_error(T, T);
    EXPECT_EQ(e.e_rr, -1.0);
    EXPECT_EQ(e.e_rr_offset_free, 0.0);
    EXPECT_EQ(e.translation_error, 0.0);
    EXPECT_LT(e.rotation_angle_error, 1e-6);
  }
}

TEST(TransformError, TranslationOffset) {
  const auto e = transform_error(RigidTransform::identity(), RigidTransform::from_translation({0.1, 0, 0}));
  EXPECT_NEAR(e.e_rr, -0.99, 1e-15);
  EXPECT_NEAR(e.translation_error, 0.1, 1e-15);
  EXPECT_EQ(e.rotation_angle_error, 0.0);
}

TEST(TransformError, AntipodalRotation) {
  EXPECT_NEAR(transform_error(RigidTransform::identity(), testing::rot_z(180)).rotation_angle_error, 180.0, 1e-9);
}

TEST(TransformError, KnownAngle) {
  const auto T = RigidTransform::from_axis_angle(Vec3(1, 2, 3), 0.3);
  const auto S = compose(T, RigidTransform::from_axis_angle(Vec3(-1, 0, 2), 12.5 * std::numbers::pi / 180));
  EXPECT_NEAR(transform_error(T, S).rotation_angle_error, 12.5, 1e-9);
}

TEST(TransformError, SymmetricAndBounded) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto a = rng.transform(), b = rng.transform();
    const auto ab = transform_error(a, b), ba = transform_error(b, a);
    EXPECT_NEAR(ab.e_rr, ba.e_rr, 1e-12);
    EXPECT_GE(ab.e_rr_offset_free, 0.0);
    EXPECT_GE(ab.rotation_angle_error, 0.0);
    EXPECT_LE(ab.rotation_angle_error, 180.0);
    EXPECT_NEAR(ab.rotation_angle_error, ba.rotation_angle_error, 1e-9);
  }
}

// --- traces and convergence tables -----------------------------------------

RegistrationTrace trace_of(std::initializer_list<double> fitness) {
  RegistrationTrace t;
  double clock = 0;
  for (const double f : fitness) t.records.push_back({Stage::kSingle, f, 0.2, true, 10, clock += 0.5});
  return t;
}

TEST(ConvergenceTable, SingleIterationSeries) {
  const auto table = convergence_table({{"a", trace_of({3.0})}}, 1.0);
  ASSERT_EQ(table.series.size(), 1u);
  EXPECT_EQ(table.series[0].points.size(), 1u);
  EXPECT_FALSE(table.series[0].iterations_to_threshold);
}

TEST(ConvergenceTable, IterationsToThreshold) {
  const auto table = convergence_table({{"a", trace_of({4, 2, 1})}, {"b", trace_of({4, 3, 2, 1})}}, 1.0);
  EXPECT_EQ(table.series[0].iterations_to_threshold, 3u);
  EXPECT_EQ(table.series[1].iterations_to_threshold, 4u);
  EXPECT_EQ(table.series[1].total_elapsed, 2.0);
  EXPECT_EQ(convergence_csv(table),
            "series,iteration,fitness\na,1,4\na,2,2\na,3,1\nb,1,4\nb,2,3\nb,3,2\nb,4,1\n");
}

TEST(ConvergenceTable, BothEnginesEndBelowTheirStart) {
  const auto pair = synthetic::make_pair({}, 3);
  const auto fs = fs_hicp(pair.source, pair.target, FsHicpParams{});
  const auto icp = icp_point_to_point(pair.source, pair.target, IcpParams{});
  const auto table = convergence_table({{"fs-hicp", fs.trace}, {"point-to-point", icp.trace}}, 1e-3);
  for (const auto& s : table.series) {
    ASSERT_GE(s.points.size(), 2u) << s.label;
    EXPECT_LT(s.points.back().second, s.points.front().second) << s.label;
  }
}

TEST(TraceCsv, HeaderAndRows) {
  RegistrationTrace t;
  t.records.push_back({Stage::kCoarse, 0.25, 0.2, true, 12, 0.0});
  t.records.push_back({Stage::kFine, 0.125, 0.1, false, 11, 0.5});
  EXPECT_EQ(trace_csv(t),
            "iteration,stage,fitness,corr_dist,accepted,matched,elapsed_s\n"
            "1,coarse,0.25,0.20000000000000001,1,12,0\n"
            "2,fine,0.125,0.10000000000000001,0,11,0.5\n");
}

// --- offload planner ---------------------------------------------------------

offload::Scenario reference_scenario() { return offload::load_scenario(CLOUDREG_SCENARIO_DIR "/offload_reference.scenario"); }

TEST(EtaFromStages, TableValues) {
  const auto sc = reference_scenario();
  EXPECT_NEAR(offload::eta_from_stages(sc.stages, 1, sc.stage_total), 0.0154 / 0.0702, 1e-15);
  EXPECT_NEAR(offload::eta_from_stages(sc.stages, 1, sc.stage_total), 0.2194, 1e-4);
  EXPECT_EQ(offload::eta_from_stages(sc.stages, 0, sc.stage_total), 0.0);
  EXPECT_NEAR(offload::eta_from_stages(sc.stages, 3, sc.stage_total), 0.4843, 1e-4);
}

TEST(EtaFromStages, ReproducesCandidateEtas) {
  const auto sc = reference_scenario();
  const double expect[] = {0.22, 0.396, 0.484, 0.818, 0.852};
  for (std::size_t k = 1; k <= 5; ++k) {
    EXPECT_NEAR(offload::eta_from_stages(sc.stages, k, sc.stage_total), expect[k - 1], 0.005) << k;
  }
  // Without the printed total the last boundary misses.
  EXPECT_GT(std::abs(offload::eta_from_stages(sc.stages, 5) - 0.852), 0.005);
}

TEST(EtaFromStages, Errors) {
  const std::vector<offload::PipelineStage> zero = {{"a", 0}, {"b", 0}};
  try {
    offload::eta_from_stages(zero, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroTotalDuration);
  }
  EXPECT_THROW(offload::eta_from_stages(zero, 3), Error);
}

TEST(TransmissionTime, Values) {
  EXPECT_NEAR(offload::transmission_time(2.9, 10), 2.32, 1e-12);
  EXPECT_EQ(offload::transmission_time(0, 10), 0.0);
  EXPECT_NEAR(offload::transmission_time(6.3, 10), 5.04, 1e-12);
  try {
    offload::transmission_time(1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidBandwidth);
  }
}

TEST(Energy, ReducedCoefficients) {
  const offload::PlatformParams p;
  const double slope = 0.9 / 1.2 - 0.3 / 3.3, intercept = 0.3 / 3.3;
  EXPECT_NEAR(slope, 0.659, 1e-3);
  EXPECT_NEAR(intercept, 0.091, 1e-3);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double eta = rng.uniform(), t = rng.uniform(0, 6);
    EXPECT_NEAR(offload::energy(eta, t, p).e_lk, slope * eta + 1.3 * t + intercept, 1e-12);
  }
}

TEST(Energy, Boundaries) {
  const offload::PlatformParams p;
  EXPECT_NEAR(offload::energy(0, 0, p).e_lk, 0.3 / 3.3, 1e-15);
  EXPECT_NEAR(offload::energy(1, 0, p).e_lk, 0.75, 1e-15);
}

TEST(Energy, AffineInEtaAndDecomposes) {
  const offload::PlatformParams p;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform(0, 5);
    const double a = offload::energy(0.1, t, p).e_lk, b = offload::energy(0.4, t, p).e_lk,
                 c = offload::energy(0.7, t, p).e_lk;
    EXPECT_NEAR(b - a, c - b, 1e-12);
    const auto e = offload::energy(rng.uniform(), t, p);
    EXPECT_EQ(e.e_local + e.e_cloud + e.e_tr, e.e_lk);
  }
}

TEST(Plan, ReferenceScenarioPicks0484) {
  const auto sc = reference_scenario();
  const auto report = offload::plan(sc.candidates, sc.platform);
  EXPECT_EQ(report.best.eta, 0.484);
  EXPECT_EQ(report.best.payload, 2.9);
  ASSERT_EQ(report.candidates.size(), 7u);
  for (const auto& c : report.candidates) EXPECT_GE(c.energy.e_lk, report.candidates[report.best_index].energy.e_lk);
}

TEST(Plan, SingleCandidateAndTies) {
  const offload::PlatformParams p;
  const std::vector<offload::SplitCandidate> one = {{0.5, 1.0, "x"}};
  EXPECT_EQ(offload::plan(one, p).best.eta, 0.5);
  const std::vector<offload::SplitCandidate> two = {{0.5, 2.0, "big"}, {0.5, 1.0, "small"}};
  EXPECT_EQ(offload::plan(two, p).best.payload_desc, "small");
  // Same energy: the lower eta wins regardless of order.
  offload::PlatformParams flat;
  flat.p_local = 0.3;
  flat.u_local = 3.3;
  const std::vector<offload::SplitCandidate> tied = {{0.7, 1.0, "late"}, {0.2, 1.0, "early"}};
  EXPECT_EQ(offload::plan(tied, flat).best.payload_desc, "early");
}

TEST(Plan, EmptyCandidates) {
  try {
    offload::plan({}, offload::PlatformParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCandidates);
  }
}

TEST(Plan, BandwidthScalesTransmission) {
  auto sc = reference_scenario();
  const auto slow = offload::plan(sc.candidates, sc.platform);
  sc.platform.bandwidth = 100;
  const auto fast = offload::plan(sc.candidates, sc.platform);
  for (std::size_t i = 0; i < slow.candidates.size(); ++i) {
    EXPECT_NEAR(fast.candidates[i].energy.e_tr * 10, slow.candidates[i].energy.e_tr, 1e-12);
  }
}

TEST(Plan, JsonShape) {
  const auto sc = reference_scenario();
  const auto j = offload::to_json(offload::plan(sc.candidates, sc.platform));
  ASSERT_EQ(j["candidates"].size(), 7u);
  for (const char* key : {"eta", "payload", "payload_desc", "t_tr", "e_local", "e_cloud", "e_tr", "e_lk"}) {
    EXPECT_TRUE(j["candidates"][0].contains(key)) << key;
  }
  EXPECT_EQ(j["best"]["eta"].get<double>(), 0.484);
}

TEST(PayloadSize, EmptyAndReferenceSized) {
  EXPECT_LT(offload::payload_size(KeyframePayload{}), 0.001);
  Rng rng(6);
  KeyframePayload kf;
  kf.timestamp = 1305031102.175304;
  for (int i = 0; i < 1008; ++i) {
    kf.keypoints.push_back({rng.uniform(0, 640), rng.uniform(0, 480), rng.uniform(0, 100), static_cast<int>(rng.index(8))});
    kf.depths.push_back(rng.uniform(0.5, 7));
    KeyframePayload::Descriptor d{};
    for (auto& b : d) b = static_cast<std::uint8_t>(rng.index(256));
    kf.descriptors.push_back(d);
  }
  const double mb = offload::payload_size(kf);
  EXPECT_GE(mb, 0.15);
  EXPECT_LE(mb, 0.45);
}

TEST(Aggregates, SumsOnly) {
  const std::vector<double> robots = {1.0, 2.5, 0.25};
  EXPECT_EQ(offload::localization_energy(robots), 3.75);
  EXPECT_EQ(offload::mapping_energy(offload::PlatformParams{}, 10.0), 3.0);
  EXPECT_EQ(offload::system_energy(3.75, 3.0), 6.75);
}

TEST(Scenario, ParseErrorsNameTheLine) {
  const char* bad[] = {
      "[platform]\np_local = x\n",
      "[platform]\nwatts = 3\n",
      "[stages]\nExtractor 0.1\n",
      "[candidates]\n1.5 | 1 | too late\n",
      "[candidates]\n0.5 | -1 | negative\n",
      "[bogus]\n",
      "p_local = 1\n",
      "[platform]\nbandwidth = 0\n",
  };
  for (const char* text : bad) {
    try {
      offload::parse_scenario(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::kMalformedFile || e.code() == ErrorCode::kInvalidParams) << e.what();
    }
  }
  const auto sc = offload::parse_scenario("[platform]\nbandwidth = 54 # comment\n\n[candidates]\n");
  EXPECT_EQ(sc.platform.bandwidth, 54);
  EXPECT_TRUE(sc.candidates.empty());
}

}  // namespace
}  // namespace cloudreg
