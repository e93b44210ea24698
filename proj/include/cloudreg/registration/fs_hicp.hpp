// SPDX-License-Identifier: Apache-2.0
//
// Fitness-score hierarchical ICP.
//
//   1. drop invalid points, voxel-downsample both clouds at coarse_leaf
//   2. coarse loop: align (inner_iterations rounds, cap coarse_max_corr) and
//      keep every step while fitness >= coarse_threshold * initial fitness
//   3. re-downsample at fine_leaf, cap = fine_max_corr
//   4. fine loop: align; a step that lowers fitness is kept and shrinks the
//      cap by corr_decrement (not below corr_floor); a step that does not is
//      kept with probability accept_prob and otherwise discarded
//   5. stop after `patience` consecutive non-decreasing aligns, or when the
//      fitness / relative change falls below the convergence thresholds
//
// Accumulation: a kept step S turns the accumulated transform A into
// compose(S, A), i.e. S acts on the already-moved source.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cloudreg/error.hpp"
#include "cloudreg/filtering.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/kdtree.hpp"
#include "cloudreg/registration/align.hpp"
#include "cloudreg/registration/fitness.hpp"
#include "cloudreg/registration/rigid_fit.hpp"
#include "cloudreg/registration/types.hpp"

namespace cloudreg {

namespace detail {

// Seeded per call; never shared.
class AcceptanceRng {
 public:
  explicit AcceptanceRng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, 1) from the top 53 bits, identical on every platform.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

inline PointCloud prepare_level(const PointCloud& valid, double leaf, const char* which) {
  PointCloud c = voxel_downsample(valid, VoxelGridSpec{leaf});
  if (c.empty()) throw Error(ErrorCode::kEmptyAfterFilter, std::string(which) + " cloud is empty after filtering");
  if (c.size() < 3) {
    throw Error(ErrorCode::kDegenerateGeometry, std::string(which) + " cloud has " + std::to_string(c.size()) +
                                                    " points after downsampling at leaf " + std::to_string(leaf));
  }
  return c;
}

}  // namespace detail

inline RegistrationResult fs_hicp(const PointCloud& source, const PointCloud& target, const FsHicpParams& params,
                                  const StepObserver& observer = {}) {
  params.validate();
  detail::Stopwatch clock;
  detail::AcceptanceRng rng(params.rng_seed);

  const PointCloud src_valid = reject_invalid_points(source);
  const PointCloud tgt_valid = reject_invalid_points(target);
  if (src_valid.empty() || tgt_valid.empty()) {
    throw Error(ErrorCode::kEmptyAfterFilter, "no valid points left after invalid-point rejection");
  }

  RegistrationResult result;
  int aligns = 0;
  auto record = [&](Stage stage, const detail::AlignState& st, double cap, bool accepted) {
    TraceRecord rec{stage, st.fitness.score, cap, accepted, st.fitness.matched, clock.seconds()};
    result.trace.records.push_back(rec);
    if (observer) observer(rec, result.transform);
  };

  // Coarse stage.
  {
    const PointCloud src = detail::prepare_level(src_valid, params.coarse_leaf, "source");
    const PointCloud tgt = detail::prepare_level(tgt_valid, params.coarse_leaf, "target");
    const KdTree tree(tgt);
    const auto& tp = tgt.positions();
    auto fit = [&](const std::vector<Vec3>& moved, std::span<const Correspondence> corr) {
      return best_rigid_fit(moved, tp, corr);
    };
    detail::AlignState state = detail::make_state(src.positions(), tree, params.coarse_max_corr);
    const double initial = state.fitness.score;
    int coarse = 0;
    while (state.fitness.score >= params.coarse_threshold * initial &&
           state.fitness.score >= params.convergence_fitness && coarse < params.coarse_iteration_cap &&
           aligns < params.max_iterations) {
      const double before = state.fitness.score;
      auto out = detail::align(state, tree, params.inner_iterations, fit);
      result.transform = compose(out.step, result.transform);
      state = std::move(out.state);
      ++coarse;
      ++aligns;
      record(Stage::kCoarse, state, params.coarse_max_corr, true);
      if (detail::relative_change(before, state.fitness.score) < params.convergence_rel_change) break;
    }
  }

  // Fine stage.
  const PointCloud src = detail::prepare_level(src_valid, params.fine_leaf, "source");
  const PointCloud tgt = detail::prepare_level(tgt_valid, params.fine_leaf, "target");
  const KdTree tree(tgt);
  const auto& tp = tgt.positions();
  auto fit = [&](const std::vector<Vec3>& moved, std::span<const Correspondence> corr) {
    return best_rigid_fit(moved, tp, corr);
  };
  double cap = params.fine_max_corr;
  detail::AlignState state =
      detail::make_state(detail::transform_points(result.transform, src.positions()), tree, cap);
  std::optional<detail::AlignOutcome> discarded;  // align is deterministic: reuse while the state is unchanged
  int stale = 0;

  while (true) {
    if (state.fitness.score < params.convergence_fitness) {
      result.termination = Termination::kFitnessThreshold;
      break;
    }
    if (aligns >= params.max_iterations) {
      result.termination = Termination::kMaxIterations;
      break;
    }
    detail::AlignOutcome out =
        discarded ? std::move(*discarded) : detail::align(state, tree, params.inner_iterations, fit);
    discarded.reset();
    ++aligns;
    const double before = state.fitness.score;
    const double after = out.state.fitness.score;
    const double used_cap = cap;

    if (after < before) {
      stale = 0;
      result.transform = compose(out.step, result.transform);
      record(Stage::kFine, out.state, used_cap, true);
      const bool precise = after < params.convergence_fitness ||
                           detail::relative_change(before, after) < params.convergence_rel_change;
      const double next_cap = std::max(cap - params.corr_decrement, params.corr_floor);
      if (next_cap != cap) {
        cap = next_cap;
        state = detail::make_state(std::move(out.state.moved), tree, cap);
      } else {
        state = std::move(out.state);
      }
      if (precise) {
        result.termination = after < params.convergence_fitness ? Termination::kFitnessThreshold
                                                                : Termination::kRelativeChange;
        break;
      }
    } else {
      ++stale;
      const bool accept = rng.uniform() < params.accept_prob;
      if (accept) result.transform = compose(out.step, result.transform);
      record(Stage::kFine, out.state, used_cap, accept);
      if (accept) {
        state = std::move(out.state);
      } else {
        discarded = std::move(out);
      }
      if (stale >= params.patience) {
        result.termination = Termination::kPatience;
        break;
      }
    }
  }

  result.converged = result.termination != Termination::kMaxIterations;
  result.final_corr_dist = cap;
  const KdTree full_target(target);
  result.final_fitness =
      fitness_score(detail::transform_points(result.transform, source.positions()), full_target, cap).score;
  return result;
}

}  // namespace cloudreg
