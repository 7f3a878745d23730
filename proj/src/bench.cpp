/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pilotopt/baselines.hpp"
#include "pilotopt/closedform.hpp"
#include "pilotopt/mcoracle.hpp"
#include "pilotopt/netgen.hpp"
#include "pilotopt/rng.hpp"

namespace pilotopt::bench {

namespace {

using nlohmann::json;

constexpr Method kMethodOrder[] = {Method::kRandom, Method::kSmart,
                                   Method::kBrute, Method::kProposed};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Method method_from_name(const std::string& name) {
  if (name == "random") return Method::kRandom;
  if (name == "smart") return Method::kSmart;
  if (name == "brute") return Method::kBrute;
  if (name == "proposed") return Method::kProposed;
  throw ConfigError("unknown method '" + name +
                    "' (expected random, smart, brute or proposed)");
}

double as_positive_number(const json& v, const std::string& key) {
  if (!v.is_number())
    throw ConfigError("config key '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!(d > 0.0)) throw ConfigError("config key '" + key + "' must be > 0");
  return d;
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError("config key '" + key +
                      "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kRandom: return "random";
    case Method::kSmart: return "smart";
    case Method::kBrute: return "brute";
    case Method::kProposed: return "proposed";
  }
  return "unknown";
}

double lower_percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * n)) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0,
                                   static_cast<std::ptrdiff_t>(values.size()) - 1);
  return values[static_cast<std::size_t>(idx)];
}

CampaignConfig CampaignConfig::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

CampaignConfig CampaignConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  CampaignConfig cfg;
  std::size_t cells = 4, users = 2, antennas = 300, pilot_len = 2,
              coherence = 200;
  double noise_dbm = -96.0, data_mw = 200.0, pilot_max_mw = 200.0;
  double area_km = 1.0, min_dist_m = 35.0, shadow_db = 7.0;

  for (const auto& [key, value] : j.items()) {
    if (key == "cells") cells = as_count(value, key);
    else if (key == "users_per_cell") users = as_count(value, key);
    else if (key == "antennas") antennas = as_count(value, key);
    else if (key == "pilot_length") pilot_len = as_count(value, key);
    else if (key == "coherence_block") coherence = as_count(value, key);
    else if (key == "noise_dbm") noise_dbm = value.get<double>();
    else if (key == "data_power_mw") data_mw = as_positive_number(value, key);
    else if (key == "pilot_power_max_mw")
      pilot_max_mw = as_positive_number(value, key);
    else if (key == "area_side_km") area_km = as_positive_number(value, key);
    else if (key == "min_distance_m") min_dist_m = value.get<double>();
    else if (key == "shadow_std_db") shadow_db = value.get<double>();
    else if (key == "trials") cfg.trials = as_count(value, key);
    else if (key == "master_seed") cfg.master_seed = value.get<std::uint64_t>();
    else if (key == "workers") cfg.workers = as_count(value, key);
    else if (key == "methods") {
      if (!value.is_array())
        throw ConfigError("config key 'methods' must be an array of strings");
      cfg.methods.clear();
      for (const auto& m : value)
        cfg.methods.push_back(method_from_name(m.get<std::string>()));
    } else if (key == "multi_start_random")
      cfg.multi_start_random = as_count(value, key);
    else if (key == "warm_start") cfg.warm_start = value.get<bool>();
    else if (key == "max_iterations")
      cfg.run_options.max_iterations = as_count(value, key);
    else if (key == "stop_tol")
      cfg.run_options.stop_tol = as_positive_number(value, key);
    else if (key == "gp_tol")
      cfg.run_options.gp_tol = as_positive_number(value, key);
    else if (key == "brute_cap") cfg.brute_cap = as_count(value, key);
    else if (key == "mc_samples") cfg.mc_samples = as_count(value, key);
    else if (key == "mc_networks") cfg.mc_networks = as_count(value, key);
    else if (key == "mc_allocations")
      cfg.mc_allocations = as_count(value, key);
    else if (key == "emit_timings") cfg.emit_timings = value.get<bool>();
    else if (key == "sweep") {
      if (!value.is_object())
        throw ConfigError("config key 'sweep' must be an object");
      SweepSpec sweep;
      for (const auto& [sk, sv] : value.items()) {
        if (sk == "variable") sweep.variable = sv.get<std::string>();
        else if (sk == "values") {
          for (const auto& x : sv) sweep.values.push_back(x.get<std::size_t>());
        } else
          throw ConfigError("unknown config key 'sweep." + sk + "'");
      }
      if (sweep.variable != "users_per_cell" && sweep.variable != "antennas")
        throw ConfigError(
            "sweep.variable must be 'users_per_cell' or 'antennas'");
      if (sweep.values.empty())
        throw ConfigError("sweep.values must be nonempty");
      cfg.sweep = std::move(sweep);
    } else
      throw ConfigError("unknown config key '" + key + "'");
  }

  cfg.system = SystemConfig::with_uniform_powers(
      cells, users, antennas, pilot_len, coherence, dbm_to_watts(noise_dbm),
      pilot_max_mw * 1e-3, data_mw * 1e-3);
  cfg.system.area_side_km = area_km;
  cfg.system.min_distance_km = min_dist_m * 1e-3;
  cfg.system.shadow_std_db = shadow_db;
  try {
    cfg.system.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  // Canonical method order, duplicates dropped.
  std::vector<Method> normalized;
  for (Method m : kMethodOrder)
    if (std::find(cfg.methods.begin(), cfg.methods.end(), m) !=
        cfg.methods.end())
      normalized.push_back(m);
  if (normalized.empty()) throw ConfigError("no methods enabled");
  cfg.methods = normalized;
  if (cfg.trials == 0) throw ConfigError("trials must be >= 1");
  return cfg;
}

namespace {

struct ScenarioOutcome {
  CampaignSummary summary;
};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

TrialResult run_trial(const CampaignConfig& cfg, const SystemConfig& sys,
                      const std::vector<Method>& methods, std::size_t trial,
                      std::uint64_t trial_seed) {
  TrialResult result;
  result.trial_id = trial;
  result.seed = trial_seed;
  const netgen::NetworkRealization net =
      netgen::generate_network(sys, trial_seed);

  pilot::PilotAssignment smart;
  bool have_smart = false;
  auto ensure_smart = [&] {
    if (!have_smart) {
      smart = baselines::smart_assignment(sys, net);
      have_smart = true;
    }
  };

  for (Method m : methods) {
    MethodOutcome out;
    out.method = m;
    const double t0 = now_ms();
    switch (m) {
      case Method::kRandom: {
        const auto assign =
            baselines::random_assignment(sys, derive_seed(trial_seed, 11));
        out.min_se =
            closedform::se(pilot::from_assignment(assign, sys), net, sys)
                .min_se;
        break;
      }
      case Method::kSmart: {
        ensure_smart();
        out.min_se =
            closedform::se(pilot::from_assignment(smart, sys), net, sys)
                .min_se;
        break;
      }
      case Method::kBrute: {
        baselines::BruteForceOptions opt;
        opt.enumeration_cap = cfg.brute_cap;
        opt.gp_tol = cfg.run_options.gp_tol;
        out.min_se = baselines::brute_force(sys, net, opt).min_se;
        break;
      }
      case Method::kProposed: {
        double best = -1.0;
        std::size_t best_iters = 0;
        std::vector<pilot::PilotAllocation> starts;
        for (std::size_t r = 0; r < cfg.multi_start_random; ++r)
          starts.push_back(maxmin::init_powers_random(
              sys, derive_seed(trial_seed, 100 + r)));
        if (cfg.warm_start) {
          ensure_smart();
          starts.push_back(pilot::from_assignment(smart, sys));
        }
        for (const auto& start : starts) {
          const maxmin::IterationTrace trace =
              maxmin::run(sys, net, start, cfg.run_options);
          if (trace.final_min_se > best) {
            best = trace.final_min_se;
            best_iters = trace.iterations;
          }
        }
        out.min_se = best;
        out.iterations = best_iters;
        break;
      }
    }
    out.wall_ms = now_ms() - t0;
    result.outcomes.push_back(out);
  }
  return result;
}

CampaignSummary run_scenario(const CampaignConfig& cfg,
                             const SystemConfig& sys, std::uint64_t seed,
                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  // Drop brute force where its preconditions cannot hold, like the paper
  // does for larger user counts.
  std::vector<Method> methods = cfg.methods;
  if (std::find(methods.begin(), methods.end(), Method::kBrute) !=
      methods.end()) {
    bool ok = sys.pilot_len == sys.users_per_cell;
    if (ok) {
      double kfact = 1.0;
      for (std::size_t i = 2; i <= sys.users_per_cell; ++i)
        kfact *= static_cast<double>(i);
      ok = std::pow(kfact, static_cast<double>(sys.num_cells - 1)) <=
           static_cast<double>(cfg.brute_cap);
    }
    if (!ok) {
      std::cerr << "note: brute-force search skipped for K="
                << sys.users_per_cell << ", tau_p=" << sys.pilot_len << "\n";
      methods.erase(std::remove(methods.begin(), methods.end(), Method::kBrute),
                    methods.end());
    }
  }

  std::vector<TrialResult> results(cfg.trials);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= cfg.trials) break;
      results[t] = run_trial(cfg, sys, methods, t, derive_seed(seed, t));
    }
  };
  std::size_t workers =
      cfg.workers ? cfg.workers
                  : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<std::size_t>(workers, cfg.trials);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // trials.csv
  {
    std::ofstream out(dir / "trials.csv");
    out << "trial_id,method,min_se_bps_hz,iterations";
    if (cfg.emit_timings) out << ",wall_ms";
    out << "\n";
    for (const TrialResult& r : results)
      for (const MethodOutcome& o : r.outcomes) {
        out << r.trial_id << "," << method_name(o.method) << ","
            << format_double(o.min_se) << "," << o.iterations;
        if (cfg.emit_timings) out << "," << format_double(o.wall_ms);
        out << "\n";
      }
  }

  CampaignSummary summary;
  summary.trials = results;
  for (Method m : methods) {
    std::vector<double> values;
    for (const TrialResult& r : results)
      for (const MethodOutcome& o : r.outcomes)
        if (o.method == m) values.push_back(o.min_se);
    if (values.empty()) continue;

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    {
      std::ofstream out(dir / (std::string("cdf_") + method_name(m) + ".csv"));
      out << "se,cumulative_probability\n";
      for (std::size_t i = 0; i < sorted.size(); ++i)
        out << format_double(sorted[i]) << ","
            << format_double(static_cast<double>(i + 1) /
                             static_cast<double>(sorted.size()))
            << "\n";
    }

    MethodSummary ms;
    ms.method = m;
    ms.trials = values.size();
    ms.mean_min_se = 0.0;
    for (double v : values) ms.mean_min_se += v;
    ms.mean_min_se /= static_cast<double>(values.size());
    ms.p5_min_se = lower_percentile(values, 0.05);
    summary.methods.push_back(ms);
  }

  {
    std::ofstream out(dir / "summary.csv");
    out << "method,trials,mean_min_se_bps_hz,p5_min_se_bps_hz\n";
    for (const MethodSummary& ms : summary.methods)
      out << method_name(ms.method) << "," << ms.trials << ","
          << format_double(ms.mean_min_se) << ","
          << format_double(ms.p5_min_se) << "\n";
  }
  return summary;
}

}  // namespace

CampaignSummary run_campaign(const CampaignConfig& cfg,
                             const std::filesystem::path& out_dir) {
  if (!cfg.sweep)
    return run_scenario(cfg, cfg.system, cfg.master_seed, out_dir);

  std::filesystem::create_directories(out_dir);
  std::ofstream sweep_out(out_dir / "sweep.csv");
  sweep_out << cfg.sweep->variable
            << ",method,trials,mean_min_se_bps_hz,p5_min_se_bps_hz\n";

  CampaignSummary last;
  for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
    const std::size_t v = cfg.sweep->values[i];
    SystemConfig sys = cfg.system;
    if (cfg.sweep->variable == "users_per_cell") {
      // tau_p tracks K in the user sweep.
      sys = SystemConfig::with_uniform_powers(
          sys.num_cells, v, sys.num_antennas, v, sys.coherence_len,
          sys.noise_power_w, cfg.system.pilot_power_max_w[0],
          cfg.system.data_power_w[0]);
      sys.area_side_km = cfg.system.area_side_km;
      sys.min_distance_km = cfg.system.min_distance_km;
      sys.shadow_std_db = cfg.system.shadow_std_db;
    } else {
      sys.num_antennas = v;
    }
    sys.validate();
    const auto dir = out_dir / (cfg.sweep->variable + "_" + std::to_string(v));
    last = run_scenario(cfg, sys, derive_seed(cfg.master_seed, 0xB0B0 + i),
                        dir);
    for (const MethodSummary& ms : last.methods)
      sweep_out << v << "," << method_name(ms.method) << "," << ms.trials
                << "," << format_double(ms.mean_min_se) << ","
                << format_double(ms.p5_min_se) << "\n";
  }
  return last;
}

OracleReport verify_oracle(const CampaignConfig& cfg) {
  const SystemConfig& sys = cfg.system;
  if (sys.pilot_len == sys.coherence_len)
    throw ConfigError(
        "pilot_length equals coherence_block: every symbol is a pilot, the "
        "prelog factor is zero and SE is identically zero");

  OracleReport report;
  report.samples = cfg.mc_samples;
  for (std::size_t n = 0; n < cfg.mc_networks; ++n) {
    const auto net = netgen::generate_network(
        sys, derive_seed(cfg.master_seed, 0xA110C + n));
    for (std::size_t a = 0; a < cfg.mc_allocations; ++a) {
      const auto alloc = maxmin::init_powers_random(
          sys, derive_seed(cfg.master_seed, 0xF00D + n * 97 + a));
      const closedform::SinrReport closed = closedform::se(alloc, net, sys);

      mcoracle::SampleOptions opt;
      opt.n_samples = cfg.mc_samples;
      opt.seed = derive_seed(cfg.master_seed, 0xCAFE + n * 97 + a);
      opt.workers = cfg.workers;
      const std::vector<double> empirical =
          mcoracle::empirical_sinr_all(alloc, net, sys, opt);

      for (std::size_t l = 0; l < sys.num_cells; ++l)
        for (std::size_t k = 0; k < sys.users_per_cell; ++k) {
          const std::size_t u = sys.user_index(l, k);
          OracleDeviation d;
          d.network = n;
          d.allocation = a;
          d.cell = l;
          d.user = k;
          d.closed_form = closed.sinr[u];
          d.empirical = empirical[u];
          d.rel_deviation =
              std::fabs(d.empirical - d.closed_form) / d.closed_form;
          report.max_rel_deviation =
              std::max(report.max_rel_deviation, d.rel_deviation);
          report.deviations.push_back(d);
        }
    }
  }
  report.pass = report.max_rel_deviation < 0.01;
  return report;
}

}  // namespace pilotopt::bench
