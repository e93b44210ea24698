// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"

namespace cloudreg {

struct IcpParams {
  double max_corr_dist = 0.2;  // meters; +inf disables the cap
  int inner_iterations = 1;    // correspondence + fit rounds per recorded iteration
  int max_iterations = 100;
  double convergence_fitness = 1e-4;     // m^2
  double convergence_rel_change = 1e-6;  // between consecutive iterations
  int normal_neighbors = 10;             // point-to-plane only

  void validate() const {
    if (!(max_corr_dist > 0.0)) throw Error(ErrorCode::kInvalidParams, "max_corr_dist must be positive");
    if (inner_iterations < 1) throw Error(ErrorCode::kInvalidParams, "inner_iterations must be >= 1");
    if (max_iterations < 1) throw Error(ErrorCode::kInvalidParams, "max_iterations must be >= 1");
    if (!(convergence_fitness > 0.0) || !(convergence_rel_change > 0.0)) {
      throw Error(ErrorCode::kInvalidParams, "convergence thresholds must be positive");
    }
    if (normal_neighbors < 3) throw Error(ErrorCode::kInvalidParams, "normal_neighbors must be >= 3");
  }
};

struct FsHicpParams {
  double coarse_leaf = 0.1;
  double fine_leaf = 0.05;
  double coarse_max_corr = 0.2;
  double fine_max_corr = 0.1;
  double coarse_threshold = 0.5;  // keep refining coarsely while fitness >= this * initial
  double accept_prob = 0.3;       // chance of keeping a non-improving fine step
  double corr_decrement = 0.001;
  double corr_floor = 0.01;
  int patience = 3;
  std::uint64_t rng_seed = 42;
  int coarse_iteration_cap = 50;
  int inner_iterations = 2;
  int max_iterations = 200;  // hard cap on align calls over both stages
  double convergence_fitness = 1e-4;
  double convergence_rel_change = 1e-6;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw Error(ErrorCode::kInvalidParams, what);
    };
    require(coarse_leaf > 0.0 && std::isfinite(coarse_leaf), "coarse_leaf must be positive");
    require(fine_leaf > 0.0 && std::isfinite(fine_leaf), "fine_leaf must be positive");
    require(coarse_max_corr > 0.0 && std::isfinite(coarse_max_corr), "coarse_max_corr must be positive");
    require(fine_max_corr > 0.0 && std::isfinite(fine_max_corr), "fine_max_corr must be positive");
    require(coarse_threshold > 0.0 && coarse_threshold < 1.0, "coarse_threshold must be in (0, 1)");
    require(accept_prob >= 0.0 && accept_prob <= 1.0, "accept_prob must be in [0, 1]");
    require(corr_decrement >= 0.0, "corr_decrement must be non-negative");
    require(corr_floor > 0.0 && corr_floor < fine_max_corr, "corr_floor must be in (0, fine_max_corr)");
    require(patience >= 1, "patience must be >= 1");
    require(coarse_iteration_cap >= 0, "coarse_iteration_cap must be >= 0");
    require(inner_iterations >= 1, "inner_iterations must be >= 1");
    require(max_iterations >= 1, "max_iterations must be >= 1");
    require(convergence_fitness > 0.0 && convergence_rel_change > 0.0,
            "convergence thresholds must be positive");
  }
};

enum class Stage { kCoarse, kFine, kSingle };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kCoarse: return "coarse";
    case Stage::kFine: return "fine";
    case Stage::kSingle: return "single";
  }
  return "?";
}

struct TraceRecord {
  Stage stage = Stage::kSingle;
  double fitness = 0.0;    // m^2, after this iteration's step
  double corr_dist = 0.0;  // cap used for this iteration
  bool accepted = true;
  std::size_t matched = 0;
  double elapsed = 0.0;  // seconds since the engine started

  // Timing is excluded: two runs of the same seed are equal iff every
  // algorithmic field matches bit for bit.
  bool same_outcome(const TraceRecord& o) const {
    return stage == o.stage && fitness == o.fitness && corr_dist == o.corr_dist &&
           accepted == o.accepted && matched == o.matched;
  }
};

struct RegistrationTrace {
  std::vector<TraceRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  bool same_outcome(const RegistrationTrace& o) const {
    if (records.size() != o.records.size()) return false;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!records[i].same_outcome(o.records[i])) return false;
    }
    return true;
  }
};

enum class Termination {
  kNone,
  kFitnessThreshold,  // fitness below convergence_fitness
  kRelativeChange,    // fitness change below convergence_rel_change
  kPatience,          // no decrease for `patience` consecutive align calls
  kMaxIterations,
};

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kNone: return "none";
    case Termination::kFitnessThreshold: return "fitness_threshold";
    case Termination::kRelativeChange: return "relative_change";
    case Termination::kPatience: return "patience";
    case Termination::kMaxIterations: return "max_iterations";
  }
  return "?";
}

struct RegistrationResult {
  RigidTransform transform;  // maps the original source into the target frame
  RegistrationTrace trace;
  bool converged = false;
  // Fitness of apply(transform, source) against the full target at final_corr_dist.
  double final_fitness = 0.0;
  double final_corr_dist = 0.0;
  Termination termination = Termination::kNone;
};

/// Called after each recorded iteration with the accumulated transform in
/// effect once that iteration's accept/discard decision has been made.
using StepObserver = std::function<void(const TraceRecord&, const RigidTransform&)>;

}  // namespace cloudreg
