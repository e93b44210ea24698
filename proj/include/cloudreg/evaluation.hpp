// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cloudreg/detail/format.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/registration/types.hpp"

namespace cloudreg {

struct ErrorReport {
  // Sum of squared entry differences of R and t, minus one. The -1 offset is
  // kept as published, so a perfect estimate scores -1.
  double e_rr = 0.0;
  double e_rr_offset_free = 0.0;  // e_rr + 1
  double rotation_angle_error = 0.0;  // degrees, in [0, 180]
  double translation_error = 0.0;     // meters
};

inline ErrorReport transform_error(const RigidTransform& truth, const RigidTransform& estimate) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double d = truth.rotation()(i, j) - estimate.rotation()(i, j);
      sum += d * d;
    }
  }
  for (int i = 0; i < 3; ++i) {
    const double d = truth.translation()(i) - estimate.translation()(i);
    sum += d * d;
  }
  const Mat3 relative = truth.rotation().transpose() * estimate.rotation();
  const double angle = Eigen::AngleAxisd(Eigen::Quaterniond(relative).normalized()).angle();
  ErrorReport r;
  r.e_rr = sum - 1.0;
  r.e_rr_offset_free = sum;
  r.rotation_angle_error = std::clamp(angle * 180.0 / std::numbers::pi, 0.0, 180.0);
  r.translation_error = (truth.translation() - estimate.translation()).norm();
  return r;
}

inline constexpr const char* kTraceCsvHeader = "iteration,stage,fitness,corr_dist,accepted,matched,elapsed_s";

/// One row per trace record, iterations numbered from 1.
inline std::string trace_csv(const RegistrationTrace& trace) {
  using detail::fmt_g17;
  std::string out = std::string(kTraceCsvHeader) + "\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    out += std::to_string(i + 1) + ',' + std::string(to_string(r.stage)) + ',' + fmt_g17(r.fitness) + ',' +
           fmt_g17(r.corr_dist) + ',' + (r.accepted ? "1" : "0") + ',' + std::to_string(r.matched) + ',' +
           fmt_g17(r.elapsed) + '\n';
  }
  return out;
}

/// First 1-based iteration whose fitness is at or below `threshold`.
inline std::optional<std::size_t> iterations_to_threshold(const RegistrationTrace& trace, double threshold) {
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    if (trace.records[i].fitness <= threshold) return i + 1;
  }
  return std::nullopt;
}

struct LabeledTrace {
  std::string label;
  RegistrationTrace trace;
};

struct ConvergenceSeries {
  std::string label;
  std::vector<std::pair<std::size_t, double>> points;  // (iteration, fitness)
  double total_elapsed = 0.0;
  std::optional<std::size_t> iterations_to_threshold;
};

struct ConvergenceTable {
  double threshold = 0.0;
  std::vector<ConvergenceSeries> series;
};

inline ConvergenceTable convergence_table(const std::vector<LabeledTrace>& traces, double threshold) {
  ConvergenceTable table;
  table.threshold = threshold;
  for (const auto& lt : traces) {
    ConvergenceSeries s;
    s.label = lt.label;
    for (std::size_t i = 0; i < lt.trace.records.size(); ++i) s.points.emplace_back(i + 1, lt.trace.records[i].fitness);
    s.total_elapsed = lt.trace.empty() ? 0.0 : lt.trace.records.back().elapsed;
    s.iterations_to_threshold = iterations_to_threshold(lt.trace, threshold);
    table.series.push_back(std::move(s));
  }
  return table;
}

/// Long-form CSV: `series,iteration,fitness`.
inline std::string convergence_csv(const ConvergenceTable& table) {
  std::string out = "series,iteration,fitness\n";
  for (const auto& s : table.series) {
    for (const auto& [it, f] : s.points) out += s.label + ',' + std::to_string(it) + ',' + detail::fmt_g17(f) + '\n';
  }
  return out;
}

}  // namespace cloudreg
