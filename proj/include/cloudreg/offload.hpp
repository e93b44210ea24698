// SPDX-License-Identifier: Apache-2.0
//
// Energy model for splitting a localization pipeline between a robot and the
// cloud. A split point eta in [0, 1] is the fraction of pipeline time run on
// the robot; the rest runs in the cloud after the payload available at that
// stage boundary has been transmitted.
//
//   E_local = P_local * C_total * eta / U_local
//   E_cloud = P_cloud * C_total * (1 - eta) / U_cloud
//   E_tr    = P_tr * T_tr,   T_tr = payload[MB] * 8 / bandwidth[Mbit/s]
//   E_lk    = E_local + E_cloud + E_tr
//
// MB is 10^6 bytes and Mbit/s is 10^6 bit/s.
#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cloudreg/detail/format.hpp"
#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/io.hpp"
#include "cloudreg/keyframe.hpp"

namespace cloudreg::offload {

struct PlatformParams {
  double p_local = 0.9;   // W
  double p_cloud = 0.3;   // W
  double p_tr = 1.3;      // W
  double u_local = 1.2;   // GB/s
  double u_cloud = 3.3;   // GB/s
  double c_total = 1.0;   // GB
  double bandwidth = 10;  // Mbit/s

  void validate() const {
    const double v[] = {p_local, p_cloud, p_tr, u_local, u_cloud, c_total, bandwidth};
    for (const double x : v) {
      if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::kInvalidParams, "platform parameters must be positive");
    }
  }
};

struct PipelineStage {
  std::string name;
  double duration = 0.0;  // seconds per batch
};

struct SplitCandidate {
  double eta = 0.0;
  double payload = 0.0;  // MB
  std::string payload_desc;
};

struct EnergyBreakdown {
  double e_local = 0.0;
  double e_cloud = 0.0;
  double e_tr = 0.0;
  double e_lk = 0.0;  // J
};

struct CandidateEvaluation {
  SplitCandidate candidate;
  double t_tr = 0.0;  // s
  EnergyBreakdown energy;
};

struct PlanReport {
  std::vector<CandidateEvaluation> candidates;  // input order
  SplitCandidate best;
  std::size_t best_index = 0;
};

/// Share of pipeline time spent in the first `k` stages. `reported_total`,
/// when given, replaces the sum of all durations as the denominator (for
/// measurement tables whose printed total differs from the sum of parts).
inline double eta_from_stages(std::span<const PipelineStage> stages, std::size_t k,
                              std::optional<double> reported_total = std::nullopt) {
  if (k > stages.size()) {
    throw Error(ErrorCode::kInvalidParams,
                "k = " + std::to_string(k) + " exceeds stage count " + std::to_string(stages.size()));
  }
  double total = 0.0;
  for (const auto& s : stages) total += s.duration;
  if (reported_total) total = *reported_total;
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroTotalDuration, "total pipeline duration must be positive");
  double done = 0.0;
  for (std::size_t i = 0; i < k; ++i) done += stages[i].duration;
  return done / total;
}

inline double transmission_time(double payload_mb, double bandwidth_mbps) {
  if (!(bandwidth_mbps > 0.0) || !std::isfinite(bandwidth_mbps)) {
    throw Error(ErrorCode::kInvalidBandwidth, "bandwidth must be positive, got " + std::to_string(bandwidth_mbps));
  }
  if (!(payload_mb >= 0.0)) throw Error(ErrorCode::kInvalidParams, "payload must be non-negative");
  return payload_mb * 8.0 / bandwidth_mbps;
}

inline EnergyBreakdown energy(double eta, double t_tr, const PlatformParams& p) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::kInvalidParams, "eta must be in [0, 1]");
  EnergyBreakdown e;
  e.e_local = p.p_local * p.c_total * eta / p.u_local;
  e.e_cloud = p.p_cloud * p.c_total * (1.0 - eta) / p.u_cloud;
  e.e_tr = p.p_tr * t_tr;
  e.e_lk = e.e_local + e.e_cloud + e.e_tr;
  return e;
}

/// Exhaustive evaluation; the minimum E_lk wins, ties go to the lower eta.
inline PlanReport plan(std::span<const SplitCandidate> candidates, const PlatformParams& p) {
  if (candidates.empty()) throw Error(ErrorCode::kEmptyCandidates, "no split candidates to evaluate");
  p.validate();
  PlanReport report;
  for (const auto& c : candidates) {
    CandidateEvaluation ev{c, transmission_time(c.payload, p.bandwidth), {}};
    ev.energy = energy(c.eta, ev.t_tr, p);
    report.candidates.push_back(ev);
  }
  for (std::size_t i = 1; i < report.candidates.size(); ++i) {
    const auto& cur = report.candidates[i];
    const auto& best = report.candidates[report.best_index];
    if (cur.energy.e_lk < best.energy.e_lk ||
        (cur.energy.e_lk == best.energy.e_lk && cur.candidate.eta < best.candidate.eta)) {
      report.best_index = i;
    }
  }
  report.best = report.candidates[report.best_index].candidate;
  return report;
}

/// Serialized size of the keyframe text form, in MB.
inline double payload_size(const KeyframePayload& kf) {
  return static_cast<double>(keyframe::format(kf).size()) / 1e6;
}

inline double localization_energy(std::span<const double> e_lk_per_robot) {
  return std::accumulate(e_lk_per_robot.begin(), e_lk_per_robot.end(), 0.0);
}

inline double mapping_energy(const PlatformParams& p, double mapping_seconds) { return p.p_cloud * mapping_seconds; }

inline double system_energy(double e_localization, double e_mapping) { return e_localization + e_mapping; }

// ---------------------------------------------------------------------------
// Scenario files.
//
//   [platform]
//   p_local = 0.9          (also p_cloud, p_tr, u_local, u_cloud, c_total, bandwidth)
//   [stages]
//   total = 0.0702         optional reported total
//   Extractor | 0.0154     name | seconds
//   [candidates]
//   0.484 | 2.9 | features + depth value      eta | MB | description
//
// '#' starts a comment; blank lines are ignored.

struct Scenario {
  PlatformParams platform;
  std::vector<PipelineStage> stages;
  std::optional<double> stage_total;
  std::vector<SplitCandidate> candidates;
};

namespace detail {

inline std::vector<std::string_view> split_bar(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto bar = s.find('|', start);
    out.push_back(cloudreg::detail::trim(s.substr(start, bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text) {
  using io::detail::malformed;
  Scenario sc;
  io::detail::Lines lines(text);
  std::string_view raw;
  std::string section;
  auto number = [&](std::string_view s) {
    const auto v = cloudreg::detail::parse_double(s);
    if (!v) malformed("bad number '" + std::string(s) + "'", lines.number());
    return *v;
  };
  while (lines.next(raw)) {
    auto line = raw.substr(0, raw.find('#'));
    line = cloudreg::detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') malformed("unterminated section header", lines.number());
      section = std::string(line.substr(1, line.size() - 2));
      if (section != "platform" && section != "stages" && section != "candidates") {
        malformed("unknown section '" + section + "'", lines.number());
      }
      continue;
    }
    const auto eq = line.find('=');
    if (section == "platform") {
      if (eq == std::string_view::npos) malformed("expected 'key = value'", lines.number());
      const auto key = cloudreg::detail::trim(line.substr(0, eq));
      const double v = number(line.substr(eq + 1));
      auto& p = sc.platform;
      if (key == "p_local") p.p_local = v;
      else if (key == "p_cloud") p.p_cloud = v;
      else if (key == "p_tr") p.p_tr = v;
      else if (key == "u_local") p.u_local = v;
      else if (key == "u_cloud") p.u_cloud = v;
      else if (key == "c_total") p.c_total = v;
      else if (key == "bandwidth") p.bandwidth = v;
      else malformed("unknown platform key '" + std::string(key) + "'", lines.number());
    } else if (section == "stages") {
      if (eq != std::string_view::npos) {
        if (cloudreg::detail::trim(line.substr(0, eq)) != "total") malformed("only 'total' may be assigned here", lines.number());
        sc.stage_total = number(line.substr(eq + 1));
        continue;
      }
      const auto cols = detail::split_bar(line);
      if (cols.size() != 2) malformed("stage row needs 'name | seconds'", lines.number());
      const double d = number(cols[1]);
      if (!(d >= 0.0)) malformed("stage duration must be non-negative", lines.number());
      sc.stages.push_back({std::string(cols[0]), d});
    } else if (section == "candidates") {
      const auto cols = detail::split_bar(line);
      if (cols.size() != 3) malformed("candidate row needs 'eta | MB | description'", lines.number());
      SplitCandidate c{number(cols[0]), number(cols[1]), std::string(cols[2])};
      if (!(c.eta >= 0.0 && c.eta <= 1.0)) malformed("eta must be in [0, 1]", lines.number());
      if (!(c.payload >= 0.0)) malformed("payload must be non-negative", lines.number());
      sc.candidates.push_back(std::move(c));
    } else {
      malformed("content outside any section", lines.number());
    }
  }
  sc.platform.validate();
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = io::detail::read_file(path);
  try {
    return parse_scenario(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

inline nlohmann::ordered_json to_json(const PlanReport& r) {
  nlohmann::ordered_json j;
  j["candidates"] = nlohmann::ordered_json::array();
  for (const auto& c : r.candidates) {
    j["candidates"].push_back({{"eta", c.candidate.eta},
                               {"payload", c.candidate.payload},
                               {"payload_desc", c.candidate.payload_desc},
                               {"t_tr", c.t_tr},
                               {"e_local", c.energy.e_local},
                               {"e_cloud", c.energy.e_cloud},
                               {"e_tr", c.energy.e_tr},
                               {"e_lk", c.energy.e_lk}});
  }
  j["best"] = {{"eta", r.best.eta}, {"payload", r.best.payload}, {"payload_desc", r.best.payload_desc}};
  return j;
}

}  // namespace cloudreg::offload
