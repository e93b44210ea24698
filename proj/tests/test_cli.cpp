// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "commands.hpp"

namespace cloudreg::cli {
namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cloudreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }
  static std::string read(const fs::path& p) { return io::detail::read_file(p); }

  void synth_pair(const std::string& name, std::uint64_t seed) {
    SynthOptions o;
    o.out = dir_;
    o.name = name;
    o.seed = seed;
    ASSERT_EQ(cmd_synth(o, quiet()), kOk);
  }

  Streams quiet() { return {out_, err_}; }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, RegisterSelfIsIdentity) {
  synth_pair("a", 1);
  RegisterOptions o;
  o.source = o.target = path("a.target.ply");
  o.out = path("r.json");
  ASSERT_EQ(cmd_register(o, quiet()), kOk) << err_.str();
  const auto T = read_transform(path("r.json"));
  EXPECT_LT((T.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(CliTest, RegisterIsDeterministic) {
  synth_pair("a", 2);
  for (const char* algo : {"fs-hicp", "point-to-point", "point-to-plane"}) {
    std::string first_json, first_csv;
    for (int run = 0; run < 2; ++run) {
      RegisterOptions o;
      o.source = path("a.source.ply");
      o.target = path("a.target.ply");
      o.algorithm = algo;
      o.params.seed = 7;
      o.out = path("r.json");
      o.trace = path("r.csv");
      const int rc = cmd_register(o, quiet());
      EXPECT_TRUE(rc == kOk || rc == kNotConverged) << algo << ": " << err_.str();
      if (run == 0) {
        first_json = read(path("r.json"));
        first_csv = read(path("r.csv"));
      } else {
        EXPECT_EQ(read(path("r.json")), first_json) << algo;
        EXPECT_EQ(read(path("r.csv")), first_csv) << algo;
      }
    }
  }
}

TEST_F(CliTest, TruthAddsMatchingErrorMetric) {
  synth_pair("a", 3);
  RegisterOptions o;
  o.source = path("a.source.ply");
  o.target = path("a.target.ply");
  o.truth = path("a.truth.json");
  o.out = path("r.json");
  ASSERT_EQ(cmd_register(o, quiet()), kOk) << err_.str();
  const auto j = nlohmann::json::parse(read(path("r.json")));
  const auto expected = transform_error(read_transform(path("a.truth.json")), read_transform(path("r.json")));
  EXPECT_EQ(j.at("e_rr").get<double>(), expected.e_rr);
  EXPECT_LT(j.at("rotation_error_deg").get<double>(), 2.0);
}

TEST_F(CliTest, TraceCsvMatchesRowCount) {
  synth_pair("a", 4);
  RegisterOptions o;
  o.source = path("a.source.ply");
  o.target = path("a.target.ply");
  o.out = path("r.json");
  o.trace = path("r.csv");
  cmd_register(o, quiet());
  const auto j = nlohmann::json::parse(read(path("r.json")));
  const std::string csv = read(path("r.csv"));
  EXPECT_EQ(csv.rfind(kTraceCsvHeader, 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), j.at("iterations").get<std::size_t>() + 1);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) EXPECT_EQ(line.substr(line.rfind(',')), ",0") << "elapsed is zeroed without --timing";
}

TEST_F(CliTest, InputErrorsExitOne) {
  synth_pair("a", 5);
  RegisterOptions o;
  o.source = path("missing.ply");
  o.target = path("a.target.ply");
  EXPECT_EQ(cmd_register(o, quiet()), kInputError);
  EXPECT_NE(err_.str().find("missing.ply"), std::string::npos);

  io::detail::write_file(path("bad.ply"), "ply\nformat ascii 1.0\nelement vertex 99999999999\nend_header\n1 2\n");
  o.source = path("bad.ply");
  EXPECT_EQ(cmd_register(o, quiet()), kInputError);

  o.source = path("a.source.ply");
  o.algorithm = "gicp";
  EXPECT_EQ(cmd_register(o, quiet()), kInputError);

  o.algorithm = "fs-hicp";
  o.params.accept_prob = 1.5;
  EXPECT_EQ(cmd_register(o, quiet()), kInputError);

  o.params.accept_prob.reset();
  io::detail::write_file(path("truth.json"), "{\"R\": [[1,0,0],[0,1,0],[0,0,-1]], \"t\": [0,0,0]}");
  o.truth = path("truth.json");
  EXPECT_EQ(cmd_register(o, quiet()), kInputError);
  io::detail::write_file(path("truth.json"), "[");
  EXPECT_EQ(cmd_register(o, quiet()), kInputError);
}

TEST_F(CliTest, DisjointCloudsExitTwo) {
  synth_pair("a", 6);
  const PointCloud far = apply(RigidTransform::from_translation({30, 0, 0}), io::load_cloud(path("a.target.ply")));
  io::save_cloud(path("far.ply"), far);
  RegisterOptions o;
  o.source = path("a.source.ply");
  o.target = path("far.ply");
  EXPECT_EQ(cmd_register(o, quiet()), kNotConverged);
}

TEST_F(CliTest, MergeWritesCloudAndOctree) {
  synth_pair("a", 7);
  MergeOptions o;
  o.inputs = {path("a.target.ply"), path("a.target.ply")};
  o.out = path("map.ply");
  o.octree = path("map.oct");
  o.transforms = path("poses.json");
  ASSERT_EQ(cmd_merge(o, quiet()), kOk) << err_.str();
  const PointCloud map = io::load_cloud(path("map.ply"));
  EXPECT_FALSE(map.empty());
  const auto oct = parse_octree(read(path("map.oct")));
  EXPECT_EQ(oct.total_weight(), map.size());
  const auto poses = nlohmann::json::parse(read(path("poses.json")));
  EXPECT_EQ(poses.at("poses").size(), 2u);

  o.inputs.push_back(path("nope.ply"));
  EXPECT_EQ(cmd_merge(o, quiet()), kInputError);
}

TEST_F(CliTest, MergeQuadrantFixture) {
  SynthOptions s;
  s.kind = "quadrants";
  s.out = dir_;
  s.name = "q";
  s.seed = 502;
  s.overlap = 0.5;
  s.max_rotation_deg = 10;
  s.max_translation = 0.2;
  ASSERT_EQ(cmd_synth(s, quiet()), kOk);
  MergeOptions o;
  for (int i = 0; i < 4; ++i) o.inputs.push_back(path("q_" + std::to_string(i) + ".ply"));
  o.out = path("map.ply");
  o.transforms = path("poses.json");
  ASSERT_EQ(cmd_merge(o, quiet()), kOk) << err_.str();
  const auto truth = nlohmann::json::parse(read(path("q_poses.json"))).at("poses");
  const auto got = nlohmann::json::parse(read(path("poses.json"))).at("poses");
  for (std::size_t i = 1; i < 4; ++i) {
    io::detail::write_file(path("t.json"), truth[i].dump());
    io::detail::write_file(path("g.json"), got[i].dump());
    const auto e = transform_error(read_transform(path("t.json")), read_transform(path("g.json")));
    EXPECT_LT(e.rotation_angle_error, 2.0) << i;
    EXPECT_LT(e.translation_error, 0.05) << i;
  }
}

TEST_F(CliTest, OffloadPlanPicksBest) {
  OffloadOptions o;
  o.scenario = CLOUDREG_SCENARIO_DIR "/offload_reference.scenario";
  o.out = path("plan.json");
  ASSERT_EQ(cmd_offload_plan(o, quiet()), kOk) << err_.str();
  EXPECT_NE(out_.str().find("best eta = 0.484\n"), std::string::npos) << out_.str();
  const auto slow = nlohmann::json::parse(read(path("plan.json")));

  o.bandwidth = 100;
  ASSERT_EQ(cmd_offload_plan(o, quiet()), kOk);
  const auto fast = nlohmann::json::parse(read(path("plan.json")));
  for (std::size_t i = 0; i < slow["candidates"].size(); ++i) {
    EXPECT_NEAR(fast["candidates"][i]["e_tr"].get<double>() * 10, slow["candidates"][i]["e_tr"].get<double>(), 1e-12);
  }
}

TEST_F(CliTest, OffloadPlanRejectsBadScenarios) {
  io::detail::write_file(path("empty.scenario"), "[stages]\nA | 1\n[candidates]\n");
  OffloadOptions o;
  o.scenario = path("empty.scenario");
  EXPECT_EQ(cmd_offload_plan(o, quiet()), kInputError);
  io::detail::write_file(path("bad.scenario"), "[candidates]\n0.5 | x | y\n");
  o.scenario = path("bad.scenario");
  EXPECT_EQ(cmd_offload_plan(o, quiet()), kInputError);
  EXPECT_NE(err_.str().find("line 2"), std::string::npos) << err_.str();
  o.scenario = CLOUDREG_SCENARIO_DIR "/offload_reference.scenario";
  o.bandwidth = 0;
  EXPECT_EQ(cmd_offload_plan(o, quiet()), kInputError);
}

TEST_F(CliTest, BenchSummaryShape) {
  synth_pair("a", 8);
  synth_pair("b", 9);
  BenchOptions o;
  o.fixtures = dir_;
  o.out = path("bench");
  ASSERT_EQ(cmd_bench(o, quiet()), kOk) << err_.str();
  const std::string summary = read(path("bench/summary.csv"));
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 1 + 2 * 3);
  EXPECT_NE(summary.find("\na,fs-hicp,"), std::string::npos);
  EXPECT_NE(summary.find("\nb,point-to-plane,"), std::string::npos);
  const std::string conv = read(path("bench/convergence.csv"));
  EXPECT_EQ(conv.rfind("series,iteration,fitness\n", 0), 0u);

  const std::string first = summary;
  ASSERT_EQ(cmd_bench(o, quiet()), kOk);
  EXPECT_EQ(read(path("bench/summary.csv")), first);

  fs::create_directories(path("none"));
  o.fixtures = path("none");
  EXPECT_EQ(cmd_bench(o, quiet()), kInputError);
}

TEST_F(CliTest, SynthRejectsUnknownKind) {
  SynthOptions o;
  o.kind = "forest";
  o.out = dir_;
  EXPECT_EQ(cmd_synth(o, quiet()), kInputError);
}

#ifdef CLOUDREG_CLI_PATH
TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = CLOUDREG_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int status = std::system((bin + " " + args + " > " + path("log").string() + " 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(run("offload-plan " CLOUDREG_SCENARIO_DIR "/offload_reference.scenario"), 0);
  EXPECT_NE(read(path("log")).find("best eta = 0.484"), std::string::npos);
  EXPECT_EQ(run("register " + path("x.ply").string() + " " + path("y.ply").string()), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run(""), 1);
}
#endif

}  // namespace
}  // namespace cloudreg::cli
