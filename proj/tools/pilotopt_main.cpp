/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pilotopt/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerifyFailed = 3;

int do_run(const std::string& config_path, const std::string& out_dir,
           long long trials, long long workers, long long seed,
           const std::string& methods, bool timings) {
  auto cfg = pilotopt::bench::CampaignConfig::from_json_file(config_path);
  if (trials >= 0) cfg.trials = static_cast<std::size_t>(trials);
  if (workers >= 0) cfg.workers = static_cast<std::size_t>(workers);
  if (seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed);
  if (timings) cfg.emit_timings = true;
  if (!methods.empty()) {
    std::vector<pilotopt::bench::Method> selected;
    std::stringstream ss(methods);
    std::string item;
    pilotopt::bench::CampaignConfig probe = cfg;
    std::string method_json = "[";
    bool first = true;
    while (std::getline(ss, item, ',')) {
      if (!first) method_json += ",";
      method_json += "\"" + item + "\"";
      first = false;
    }
    method_json += "]";
    // Reuse the config parser's validation of method names.
    auto patched = pilotopt::bench::CampaignConfig::from_json_text(
        "{\"methods\": " + method_json + "}");
    cfg.methods = patched.methods;
  }

  const auto summary = pilotopt::bench::run_campaign(cfg, out_dir);
  std::printf("%-10s %8s %18s %18s\n", "method", "trials", "mean min-SE",
              "95%-likely min-SE");
  for (const auto& m : summary.methods)
    std::printf("%-10s %8zu %18.6f %18.6f\n",
                pilotopt::bench::method_name(m.method), m.trials,
                m.mean_min_se, m.p5_min_se);
  std::printf("outputs written to %s\n", out_dir.c_str());
  return kExitOk;
}

int do_verify(const std::string& config_path, long long workers) {
  auto cfg = pilotopt::bench::CampaignConfig::from_json_file(config_path);
  if (workers >= 0) cfg.workers = static_cast<std::size_t>(workers);
  const auto report = pilotopt::bench::verify_oracle(cfg);
  std::printf(
      "closed-form vs Monte Carlo SINR over %zu networks x %zu allocations "
      "(%zu samples each)\n",
      cfg.mc_networks, cfg.mc_allocations, report.samples);
  for (const auto& d : report.deviations)
    std::printf(
        "  net %zu alloc %zu user (%zu,%zu): closed %.6g empirical %.6g "
        "rel-dev %.4f%%\n",
        d.network, d.allocation, d.cell, d.user, d.closed_form, d.empirical,
        100.0 * d.rel_deviation);
  std::printf("max relative deviation: %.4f%% -> %s\n",
              100.0 * report.max_rel_deviation,
              report.pass ? "PASS (< 1%)" : "FAIL (>= 1%)");
  return report.pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint pilot-sequence and pilot-power optimization benchmark "
               "for multi-cell massive MIMO"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", methods;
  long long trials = -1, workers = -1, seed = -1;
  bool timings = false;

  CLI::App* run = app.add_subcommand("run", "run a benchmark campaign");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "output directory")
      ->envname("PILOTOPT_OUT");
  run->add_option("--trials", trials, "override trial count");
  run->add_option("--workers", workers, "override worker count")
      ->envname("PILOTOPT_WORKERS");
  run->add_option("--seed", seed, "override master seed");
  run->add_option("--methods", methods,
                  "comma-separated subset of random,smart,brute,proposed");
  run->add_flag("--timings", timings,
                "add wall-clock columns (breaks byte-identical reruns)");

  CLI::App* verify =
      app.add_subcommand("verify", "check the closed-form SINR against the "
                                   "Monte Carlo oracle");
  verify->add_option("--config", config_path, "JSON config file")->required();
  verify->add_option("--workers", workers, "override worker count")
      ->envname("PILOTOPT_WORKERS");

  try {
    app.parse(argc, argv);
    if (run->parsed())
      return do_run(config_path, out_dir, trials, workers, seed, methods,
                    timings);
    return do_verify(config_path, workers);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const pilotopt::bench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
