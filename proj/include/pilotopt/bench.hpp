/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pilotopt/maxmin.hpp"
#include "pilotopt/types.hpp"

namespace pilotopt::bench {

/// Raised on malformed configs; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method { kRandom, kSmart, kBrute, kProposed };
const char* method_name(Method m);

struct SweepSpec {
  std::string variable;  // "users_per_cell" (tau_p follows K) or "antennas"
  std::vector<std::size_t> values;
};

/// Campaign settings parsed from a JSON file with units in the key names;
/// defaults reproduce the paper-scale scenario. Unknown keys fail fast.
struct CampaignConfig {
  SystemConfig system;
  std::size_t trials = 200;
  std::uint64_t master_seed = 1;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::vector<Method> methods = {Method::kRandom, Method::kSmart,
                                 Method::kBrute, Method::kProposed};
  std::size_t multi_start_random = 5;
  bool warm_start = true;
  maxmin::RunOptions run_options;
  std::size_t brute_cap = 10000;
  std::size_t mc_samples = 200000;
  std::size_t mc_networks = 5;
  std::size_t mc_allocations = 3;
  std::optional<SweepSpec> sweep;
  /// Wall-clock columns are opt-in: they would break byte-identical reruns.
  bool emit_timings = false;

  static CampaignConfig from_json_file(const std::filesystem::path& path);
  static CampaignConfig from_json_text(const std::string& text);
};

struct MethodOutcome {
  Method method;
  double min_se = 0.0;
  std::size_t iterations = 0;  // proposed only
  double wall_ms = 0.0;
};

struct TrialResult {
  std::size_t trial_id = 0;
  std::uint64_t seed = 0;
  std::vector<MethodOutcome> outcomes;
};

struct MethodSummary {
  Method method;
  std::size_t trials = 0;
  double mean_min_se = 0.0;
  /// 5th percentile of min-SE: the level all but the unluckiest 5% of
  /// realizations exceed.
  double p5_min_se = 0.0;
};

struct CampaignSummary {
  std::vector<MethodSummary> methods;
  std::vector<TrialResult> trials;
};

/// Runs the trial loop for one scenario (or a sweep of scenarios), writing
/// per-trial, per-method CDF and summary CSVs under `out_dir`. Reruns with
/// the same config and master seed are byte-identical for any worker count.
CampaignSummary run_campaign(const CampaignConfig& cfg,
                             const std::filesystem::path& out_dir);

struct OracleDeviation {
  std::size_t network, allocation, cell, user;
  double closed_form, empirical, rel_deviation;
};

struct OracleReport {
  std::vector<OracleDeviation> deviations;
  double max_rel_deviation = 0.0;
  bool pass = false;
  std::size_t samples = 0;
};

/// Compares the closed-form SINR against the Monte Carlo estimate over
/// random networks and random feasible allocations; passes at 1% maximum
/// relative deviation.
OracleReport verify_oracle(const CampaignConfig& cfg);

/// Order statistic used for the "95%-likely" point: the ceil(q*n)-th
/// smallest value (1-based), clamped to the sample range.
double lower_percentile(std::vector<double> values, double q);

}  // namespace pilotopt::bench
