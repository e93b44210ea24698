// SPDX-License-Identifier: Apache-2.0
//
// Subcommand bodies for the cloudreg tool. Argument parsing and logging live
// in cloudreg.cpp; everything here reports through the given streams and
// returns a process exit code:
//   0  success / converged
//   1  input or configuration error
//   2  the registration ran but did not converge, or found nothing to align
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cloudreg/cloudreg.hpp"
#include "cloudreg/synthetic.hpp"

namespace cloudreg::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kNotConverged = 2;

struct Streams {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

/// Flag values that map onto registration parameters. Unset fields keep the
/// library defaults.
struct ParamOverrides {
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> leaf_coarse, leaf_fine, max_corr_coarse, max_corr_fine, accept_prob;
  std::optional<int> patience;

  RegistrationConfig config() const {
    RegistrationConfig c;
    c.fs.rng_seed = seed;
    if (leaf_coarse) c.fs.coarse_leaf = *leaf_coarse;
    if (leaf_fine) c.fs.fine_leaf = *leaf_fine;
    if (max_corr_coarse) c.fs.coarse_max_corr = *max_corr_coarse;
    if (max_corr_fine) c.fs.fine_max_corr = *max_corr_fine;
    if (accept_prob) c.fs.accept_prob = *accept_prob;
    if (patience) c.fs.patience = *patience;
    // The classic engines have a single cap; the coarse cap is their default too.
    c.icp.max_corr_dist = c.fs.coarse_max_corr;
    return c;
  }
};

/// Errors raised by the engines on well-formed input.
inline bool algorithmic(ErrorCode code) {
  return code == ErrorCode::kNoCorrespondences || code == ErrorCode::kDegenerateGeometry ||
         code == ErrorCode::kSingularSystem;
}

inline ordered_json transform_json(const RigidTransform& T) {
  ordered_json R = ordered_json::array();
  for (int i = 0; i < 3; ++i) {
    R.push_back({T.rotation()(i, 0), T.rotation()(i, 1), T.rotation()(i, 2)});
  }
  return {{"R", R}, {"t", {T.translation().x(), T.translation().y(), T.translation().z()}}};
}

/// Reads `{"R": [[...],[...],[...]], "t": [...]}`; extra keys are ignored, so
/// a register output file is itself a valid truth file.
inline RigidTransform read_transform(const fs::path& path) {
  const std::string text = io::detail::read_file(path);
  const auto bad = [&](const std::string& what) {
    return Error(ErrorCode::kMalformedFile, path.string() + ": " + what);
  };
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw bad("not a JSON object");
  if (!j.contains("R") || !j.contains("t")) throw bad("expected keys 'R' and 't'");
  const auto& R = j["R"];
  const auto& t = j["t"];
  if (!R.is_array() || R.size() != 3 || !t.is_array() || t.size() != 3) throw bad("R must be 3x3 and t length 3");
  Mat4 m = Mat4::Identity();
  for (int i = 0; i < 3; ++i) {
    const auto& row = R[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != 3) throw bad("R must be 3x3");
    for (int k = 0; k < 3; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) throw bad("R entries must be numbers");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    if (!t[static_cast<std::size_t>(i)].is_number()) throw bad("t entries must be numbers");
    m(i, 3) = t[static_cast<std::size_t>(i)].get<double>();
  }
  try {
    return RigidTransform::from_matrix(m);
  } catch (const Error& e) {
    throw bad(e.message());
  }
}

inline void write_json(const fs::path& path, const ordered_json& j) { io::detail::write_file(path, j.dump(2) + "\n"); }

inline void strip_timing(RegistrationTrace& trace) {
  for (auto& r : trace.records) r.elapsed = 0.0;
}

/// Runs `body` and maps exceptions to exit codes: engine failures on valid
/// input give 2, everything else 1. The message goes to `err`.
inline int guarded(Streams s, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    s.err << "error: " << e.what() << "\n";
    return algorithmic(e.code()) ? kNotConverged : kInputError;
  } catch (const std::exception& e) {
    s.err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

// --- register ---------------------------------------------------------------

struct RegisterOptions {
  fs::path source, target;
  std::string algorithm = "fs-hicp";
  ParamOverrides params;
  std::optional<fs::path> truth;
  std::optional<fs::path> out;    // JSON; stdout when unset
  std::optional<fs::path> trace;  // CSV
  bool timing = false;
};

inline int cmd_register(const RegisterOptions& o, Streams s = {}) {
  return guarded(s, [&] {
    const Algorithm algorithm = parse_algorithm(o.algorithm);
    const RegistrationConfig config = o.params.config();
    std::optional<RigidTransform> truth;
    if (o.truth) truth = read_transform(*o.truth);
    const PointCloud source = io::load_cloud(o.source);
    const PointCloud target = io::load_cloud(o.target);

    RegistrationResult r = register_with(algorithm, source, target, config);
    if (!o.timing) strip_timing(r.trace);

    ordered_json j;
    j["algorithm"] = std::string(to_string(algorithm));
    j["converged"] = r.converged;
    j["termination"] = std::string(to_string(r.termination));
    j["iterations"] = r.trace.size();
    j["final_fitness"] = r.final_fitness;
    j["final_corr_dist"] = r.final_corr_dist;
    const auto tj = transform_json(r.transform);
    j["R"] = tj["R"];
    j["t"] = tj["t"];
    if (truth) {
      const auto e = transform_error(*truth, r.transform);
      j["e_rr"] = e.e_rr;
      j["rotation_error_deg"] = e.rotation_angle_error;
      j["translation_error_m"] = e.translation_error;
    }
    if (o.out) {
      write_json(*o.out, j);
    } else {
      s.out << j.dump(2) << "\n";
    }
    if (o.trace) io::detail::write_file(*o.trace, trace_csv(r.trace));
    return r.converged ? kOk : kNotConverged;
  });
}

// --- merge --------------------------------------------------------------------

struct MergeOptions {
  std::vector<fs::path> inputs;
  ParamOverrides params;
  fs::path out;  // PLY
  std::optional<fs::path> octree;
  double resolution = 0.05;
  std::optional<fs::path> transforms;  // JSON of per-cloud poses in the frame of cloud 0
};

inline int cmd_merge(const MergeOptions& o, Streams s = {}) {
  return guarded(s, [&] {
    const FsHicpParams params = o.params.config().fs;
    params.validate();
    if (o.octree && !(o.resolution > 0.0)) {
      throw Error(ErrorCode::kInvalidResolution, "octree resolution must be positive");
    }
    std::vector<PointCloud> clouds;
    for (const auto& p : o.inputs) clouds.push_back(io::load_cloud(p));
    const MergeResult m = merge(clouds, params);
    io::save_cloud(o.out, m.global_cloud);
    if (o.octree) io::detail::write_file(*o.octree, serialize_octree(to_octree(m.global_cloud, o.resolution)));
    ordered_json poses = ordered_json::array();
    for (std::size_t i = 0; i < m.transforms.size(); ++i) {
      auto pj = transform_json(m.transforms[i]);
      pj["input"] = o.inputs[i].filename().string();
      if (i > 0) pj["pair_converged"] = m.pair_results[i - 1].converged;
      poses.push_back(pj);
    }
    if (o.transforms) write_json(*o.transforms, ordered_json{{"poses", poses}});
    s.out << "merged " << clouds.size() << " clouds into " << m.global_cloud.size() << " points\n";
    bool all = true;
    for (std::size_t i = 0; i < m.pair_results.size(); ++i) {
      const auto& r = m.pair_results[i];
      all = all && r.converged;
      s.out << "pair " << i + 1 << ": " << to_string(r.termination) << ", fitness "
            << detail::fmt_g17(r.final_fitness) << "\n";
    }
    return all ? kOk : kNotConverged;
  });
}

// --- offload-plan ---------------------------------------------------------------

struct OffloadOptions {
  fs::path scenario;
  std::optional<double> bandwidth;  // Mbit/s
  std::optional<fs::path> out;
};

inline int cmd_offload_plan(const OffloadOptions& o, Streams s = {}) {
  return guarded(s, [&] {
    offload::Scenario sc = offload::load_scenario(o.scenario);
    if (o.bandwidth) {
      if (!(*o.bandwidth > 0.0) || !std::isfinite(*o.bandwidth)) {
        throw Error(ErrorCode::kInvalidBandwidth, "bandwidth must be positive");
      }
      sc.platform.bandwidth = *o.bandwidth;
    }
    const auto report = offload::plan(sc.candidates, sc.platform);
    using detail::fmt_shortest;
    s.out << "eta,payload_mb,t_tr_s,e_local_j,e_cloud_j,e_tr_j,e_lk_j,payload\n";
    for (const auto& c : report.candidates) {
      s.out << fmt_shortest(c.candidate.eta) << ',' << fmt_shortest(c.candidate.payload) << ','
            << fmt_shortest(c.t_tr) << ',' << fmt_shortest(c.energy.e_local) << ','
            << fmt_shortest(c.energy.e_cloud) << ',' << fmt_shortest(c.energy.e_tr) << ','
            << fmt_shortest(c.energy.e_lk) << ',' << c.candidate.payload_desc << "\n";
    }
    s.out << "best eta = " << fmt_shortest(report.best.eta) << "\n";
    if (o.out) write_json(*o.out, offload::to_json(report));
    return kOk;
  });
}

// --- bench ----------------------------------------------------------------------
//
// A fixture directory holds <name>.source.ply, <name>.target.ply and
// optionally <name>.truth.json. Outputs go to <out>/convergence.csv and
// <out>/summary.csv.

struct BenchOptions {
  fs::path fixtures;
  fs::path out;
  ParamOverrides params;
  double threshold = 1e-3;  // m^2, for iterations-to-threshold
  bool timing = false;
};

struct Fixture {
  std::string name;
  fs::path source, target;
  std::optional<fs::path> truth;
};

inline std::vector<Fixture> find_fixtures(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<Fixture> out;
  const std::string suffix = ".source.ply";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    Fixture f;
    f.name = file.substr(0, file.size() - suffix.size());
    f.source = entry.path();
    f.target = dir / (f.name + ".target.ply");
    if (const auto t = dir / (f.name + ".truth.json"); fs::exists(t)) f.truth = t;
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const Fixture& a, const Fixture& b) { return a.name < b.name; });
  if (out.empty()) throw Error(ErrorCode::kIo, "no *.source.ply fixtures in " + dir.string());
  return out;
}

inline int cmd_bench(const BenchOptions& o, Streams s = {}) {
  return guarded(s, [&] {
    const auto fixtures = find_fixtures(o.fixtures);
    const RegistrationConfig config = o.params.config();
    std::vector<LabeledTrace> traces;
    std::string summary =
        "fixture,algorithm,converged,iterations,iterations_to_threshold,wall_time_s,final_fitness,e_rr,"
        "rotation_error_deg,translation_error_m\n";
    for (const auto& f : fixtures) {
      const PointCloud source = io::load_cloud(f.source);
      const PointCloud target = io::load_cloud(f.target);
      std::optional<RigidTransform> truth;
      if (f.truth) truth = read_transform(*f.truth);
      for (const auto algorithm : kAllAlgorithms) {
        const std::string label = f.name + "/" + std::string(to_string(algorithm));
        std::string row = f.name + ',' + std::string(to_string(algorithm)) + ',';
        try {
          const auto start = std::chrono::steady_clock::now();
          RegistrationResult r = register_with(algorithm, source, target, config);
          const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          if (!o.timing) strip_timing(r.trace);
          const auto hit = iterations_to_threshold(r.trace, o.threshold);
          row += std::string(r.converged ? "1" : "0") + ',' + std::to_string(r.trace.size()) + ',' +
                 (hit ? std::to_string(*hit) : std::string()) + ',' + detail::fmt_g17(o.timing ? wall : 0.0) + ',' +
                 detail::fmt_g17(r.final_fitness) + ',';
          if (truth) {
            const auto e = transform_error(*truth, r.transform);
            row += detail::fmt_g17(e.e_rr) + ',' + detail::fmt_g17(e.rotation_angle_error) + ',' +
                   detail::fmt_g17(e.translation_error);
          } else {
            row += ",,";
          }
          traces.push_back({label, std::move(r.trace)});
        } catch (const Error& e) {
          if (!algorithmic(e.code())) throw;
          s.err << label << ": " << e.what() << "\n";
          row += "0,0,,,,,,";
        }
        summary += row + '\n';
      }
    }
    fs::create_directories(o.out);
    io::detail::write_file(o.out / "convergence.csv", convergence_csv(convergence_table(traces, o.threshold)));
    io::detail::write_file(o.out / "summary.csv", summary);
    s.out << summary;
    return kOk;
  });
}

// --- synth ------------------------------------------------------------------------

struct SynthOptions {
  std::string kind = "pair";  // pair | quadrants | room
  fs::path out;               // directory
  std::string name = "pair";
  std::uint64_t seed = kDefaultSeed;
  std::size_t points = 1000;
  double overlap = 0.6;
  double noise = 0.005;
  double max_rotation_deg = 30.0;
  double max_translation = 0.5;
};

inline int cmd_synth(const SynthOptions& o, Streams s = {}) {
  return guarded(s, [&] {
    if (o.points < 3) throw Error(ErrorCode::kInvalidParams, "--points must be at least 3");
    if (!(o.overlap > 0.0 && o.overlap < 1.0)) throw Error(ErrorCode::kInvalidParams, "--overlap must be in (0, 1)");
    if (!(o.noise >= 0.0)) throw Error(ErrorCode::kInvalidParams, "--noise must be non-negative");
    fs::create_directories(o.out);
    if (o.kind == "pair") {
      synthetic::PairSpec spec;
      spec.points = o.points;
      spec.min_overlap = o.overlap;
      spec.noise = o.noise;
      spec.max_rotation_deg = o.max_rotation_deg;
      spec.max_translation = o.max_translation;
      const auto pair = synthetic::make_pair(spec, o.seed);
      io::save_cloud(o.out / (o.name + ".source.ply"), pair.source);
      io::save_cloud(o.out / (o.name + ".target.ply"), pair.target);
      write_json(o.out / (o.name + ".truth.json"), transform_json(pair.truth));
      s.out << o.name << ": overlap " << detail::fmt_g17(pair.overlap) << "\n";
    } else if (o.kind == "quadrants") {
      const auto set = synthetic::make_quadrants(o.points, o.overlap, o.noise, o.max_rotation_deg, o.max_translation, o.seed);
      ordered_json poses = ordered_json::array();
      for (std::size_t i = 0; i < set.clouds.size(); ++i) {
        const std::string file = o.name + "_" + std::to_string(i) + ".ply";
        io::save_cloud(o.out / file, set.clouds[i]);
        auto pj = transform_json(set.poses[i]);
        pj["input"] = file;
        poses.push_back(pj);
      }
      write_json(o.out / (o.name + "_poses.json"), ordered_json{{"poses", poses}});
    } else if (o.kind == "room") {
      synthetic::Sampler rng(o.seed);
      io::save_cloud(o.out / (o.name + ".ply"), rng.sample(synthetic::make_room(), o.points, o.noise));
    } else {
      throw Error(ErrorCode::kInvalidParams, "unknown synth kind '" + o.kind + "' (pair, quadrants, room)");
    }
    return kOk;
  });
}

}  // namespace cloudreg::cli
