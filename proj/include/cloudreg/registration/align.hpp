// SPDX-License-Identifier: Apache-2.0
//
// Building blocks shared by every engine: an "align" call runs a fixed number
// of correspondence + fit rounds from the current pose and reports the fitness
// of the pose it ends at.
#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cloudreg/geometry.hpp"
#include "cloudreg/kdtree.hpp"
#include "cloudreg/registration/fitness.hpp"
#include "cloudreg/registration/types.hpp"

namespace cloudreg::detail {

inline std::vector<Vec3> transform_points(const RigidTransform& T, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(T * p);
  return out;
}

/// Source positions under the current pose, with their matches at `cap`.
struct AlignState {
  std::vector<Vec3> moved;
  std::vector<Correspondence> corr;
  double cap = 0.0;
  FitnessScore fitness;
};

inline AlignState make_state(std::vector<Vec3> moved, const KdTree& target, double cap) {
  AlignState s;
  s.corr = find_correspondences(moved, target, cap);
  s.fitness = score_correspondences(s.corr);
  s.moved = std::move(moved);
  s.cap = cap;
  return s;
}

struct AlignOutcome {
  RigidTransform step;  // motion from the starting pose to the final pose
  AlignState state;
};

/// `fit(moved, corr)` returns the incremental rigid step for one round.
template <typename FitFn>
AlignOutcome align(const AlignState& from, const KdTree& target, int rounds, FitFn&& fit) {
  AlignOutcome out{RigidTransform::identity(), from};
  for (int r = 0; r < rounds; ++r) {
    const RigidTransform inc = fit(out.state.moved, out.state.corr);
    out.step = compose(inc, out.step);
    out.state = make_state(transform_points(inc, out.state.moved), target, from.cap);
  }
  return out;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double relative_change(double before, double after) {
  if (before == 0.0) return after == 0.0 ? 0.0 : std::abs(after - before);
  return std::abs(before - after) / before;
}

/// Loop shared by the single-resolution engines.
template <typename FitFn>
RegistrationResult run_single_stage(const PointCloud& source, const KdTree& target, const IcpParams& params,
                                    const RigidTransform& init, FitFn&& fit, const StepObserver& observer) {
  Stopwatch clock;
  RegistrationResult result;
  result.transform = init;
  result.final_corr_dist = params.max_corr_dist;

  AlignState state = make_state(transform_points(init, source.positions()), target, params.max_corr_dist);
  for (int it = 0; it < params.max_iterations; ++it) {
    const double before = state.fitness.score;
    AlignOutcome step = align(state, target, params.inner_iterations, fit);
    result.transform = compose(step.step, result.transform);
    state = std::move(step.state);

    TraceRecord rec{Stage::kSingle, state.fitness.score, params.max_corr_dist, true, state.fitness.matched,
                    clock.seconds()};
    result.trace.records.push_back(rec);
    if (observer) observer(rec, result.transform);

    if (state.fitness.score < params.convergence_fitness) {
      result.termination = Termination::kFitnessThreshold;
      break;
    }
    if (relative_change(before, state.fitness.score) < params.convergence_rel_change) {
      result.termination = Termination::kRelativeChange;
      break;
    }
  }
  if (result.termination == Termination::kNone) result.termination = Termination::kMaxIterations;
  result.converged = result.termination != Termination::kMaxIterations;
  result.final_fitness =
      fitness_score(transform_points(result.transform, source.positions()), target, result.final_corr_dist).score;
  return result;
}

}  // namespace cloudreg::detail
