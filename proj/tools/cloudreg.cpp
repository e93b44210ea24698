// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace cloudreg::cli;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("cloudreg");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("CLOUDREG_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    if (level != "error") spdlog::warn("CLOUDREG_LOG={} not recognized, using error", level);
    spdlog::set_level(spdlog::level::err);
  }
}

void add_params(CLI::App* cmd, ParamOverrides& p) {
  cmd->add_option("--seed", p.seed, "RNG seed for FS-HICP acceptance draws")->capture_default_str();
  cmd->add_option("--leaf-coarse", p.leaf_coarse, "coarse voxel leaf (m)");
  cmd->add_option("--leaf-fine", p.leaf_fine, "fine voxel leaf (m)");
  cmd->add_option("--max-corr-coarse", p.max_corr_coarse, "coarse correspondence cap (m); also the classic engines' cap");
  cmd->add_option("--max-corr-fine", p.max_corr_fine, "initial fine correspondence cap (m)");
  cmd->add_option("--accept-prob", p.accept_prob, "probability of keeping a non-improving fine step");
  cmd->add_option("--patience", p.patience, "consecutive non-improving fine steps before stopping");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    setup_logging();
  } catch (const std::exception& e) {
    std::cerr << "logging setup failed: " << e.what() << "\n";
  }

  CLI::App app{"Point cloud registration, map merging and offload planning"};
  app.require_subcommand(1);

  RegisterOptions reg;
  auto* reg_cmd = app.add_subcommand("register", "Register a source cloud onto a target cloud");
  reg_cmd->add_option("source", reg.source, "source cloud (.ply or .xyz)")->required();
  reg_cmd->add_option("target", reg.target, "target cloud (.ply or .xyz)")->required();
  reg_cmd->add_option("--algorithm", reg.algorithm, "point-to-point | point-to-plane | fs-hicp")->capture_default_str();
  add_params(reg_cmd, reg.params);
  reg_cmd->add_option("--truth", reg.truth, "JSON with the true R and t; adds e_rr to the output");
  reg_cmd->add_option("--out", reg.out, "transform JSON (stdout when omitted)");
  reg_cmd->add_option("--trace", reg.trace, "per-iteration trace CSV");
  reg_cmd->add_flag("--timing", reg.timing, "write wall-clock times instead of zeros");

  MergeOptions mrg;
  auto* mrg_cmd = app.add_subcommand("merge", "Chain-register clouds into one map");
  mrg_cmd->add_option("inputs", mrg.inputs, "clouds in chain order")->required();
  add_params(mrg_cmd, mrg.params);
  mrg_cmd->add_option("--out", mrg.out, "merged cloud (.ply or .xyz)")->required();
  mrg_cmd->add_option("--octree", mrg.octree, "also write an OCT1 occupancy file");
  mrg_cmd->add_option("--resolution", mrg.resolution, "octree leaf edge (m)")->capture_default_str();
  mrg_cmd->add_option("--transforms", mrg.transforms, "per-cloud poses JSON");

  OffloadOptions off;
  auto* off_cmd = app.add_subcommand("offload-plan", "Pick the energy-minimizing split point");
  off_cmd->add_option("scenario", off.scenario, "scenario file")->required();
  off_cmd->add_option("--bandwidth", off.bandwidth, "override bandwidth (Mbit/s)");
  off_cmd->add_option("--out", off.out, "JSON report");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run every engine over a fixture directory");
  bench_cmd->add_option("fixtures", bench.fixtures, "directory of <name>.source.ply / <name>.target.ply")->required();
  bench_cmd->add_option("--out", bench.out, "output directory")->required();
  add_params(bench_cmd, bench.params);
  bench_cmd->add_option("--threshold", bench.threshold, "fitness threshold for iterations-to-threshold (m^2)")
      ->capture_default_str();
  bench_cmd->add_flag("--timing", bench.timing, "write wall-clock times instead of zeros");

  SynthOptions syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate synthetic room fixtures");
  syn_cmd->add_option("kind", syn.kind, "pair | quadrants | room")->capture_default_str();
  syn_cmd->add_option("--out", syn.out, "output directory")->required();
  syn_cmd->add_option("--name", syn.name, "file name stem")->capture_default_str();
  syn_cmd->add_option("--seed", syn.seed)->capture_default_str();
  syn_cmd->add_option("--points", syn.points, "points per view")->capture_default_str();
  syn_cmd->add_option("--overlap", syn.overlap, "minimum pairwise overlap")->capture_default_str();
  syn_cmd->add_option("--noise", syn.noise, "Gaussian noise sigma (m)")->capture_default_str();
  syn_cmd->add_option("--max-rotation", syn.max_rotation_deg, "degrees")->capture_default_str();
  syn_cmd->add_option("--max-translation", syn.max_translation, "meters")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  spdlog::debug("subcommand {}", app.get_subcommands().front()->get_name());
  int rc = kInputError;
  if (*reg_cmd) {
    spdlog::info("register {} -> {} with {}", reg.source.string(), reg.target.string(), reg.algorithm);
    rc = cmd_register(reg);
  } else if (*mrg_cmd) {
    spdlog::info("merge {} clouds", mrg.inputs.size());
    rc = cmd_merge(mrg);
  } else if (*off_cmd) {
    rc = cmd_offload_plan(off);
  } else if (*bench_cmd) {
    rc = cmd_bench(bench);
  } else if (*syn_cmd) {
    rc = cmd_synth(syn);
  }
  spdlog::debug("exit code {}", rc);
  return rc;
}
