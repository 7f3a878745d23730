/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
// Acceptance harness: one pass/fail line per criterion. Criteria sharing an
// expensive campaign run in the same group:
//   oracle       -> criterion 1
//   amgm         -> criterion 2
//   gp           -> criterion 3
//   campaign     -> criteria 4, 5, 6
//   trends       -> criterion 7
//   determinism  -> criterion 8

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../gp_test_utils.hpp"
#include "pilotopt/baselines.hpp"
#include "pilotopt/bench.hpp"
#include "pilotopt/closedform.hpp"
#include "pilotopt/gp.hpp"
#include "pilotopt/maxmin.hpp"
#include "pilotopt/netgen.hpp"
#include "pilotopt/rng.hpp"
#include "pilotopt/types.hpp"

using namespace pilotopt;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 20260811;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[criterion %d] %s — %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

void parallel_trials(std::size_t n, std::size_t workers,
                     const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w)
    pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// --------------------------------------------------------------------------
// Criterion 1: closed-form SINR vs the Monte Carlo oracle.

void run_oracle() {
  auto cfg = bench::CampaignConfig::from_json_text(R"({
    "antennas": 100,
    "mc_networks": 5,
    "mc_allocations": 3,
    "mc_samples": 200000,
    "master_seed": 20260811
  })");
  const auto rep = bench::verify_oracle(cfg);
  report(1, rep.pass,
         fmt("closed form vs Monte Carlo over %zu networks x %zu allocations "
             "(%zu users each, 2e5 samples): max relative deviation %.4f%% "
             "(threshold 1%%)",
             cfg.mc_networks, cfg.mc_allocations, cfg.system.num_users(),
             100.0 * rep.max_rel_deviation));
}

// --------------------------------------------------------------------------
// Criterion 2: AM-GM monomial bound below the posynomial, tight at anchor.

void run_amgm() {
  Rng rng(kMasterSeed);
  const std::size_t triples = 10000;
  std::size_t bad_probe = 0, bad_anchor = 0;
  double worst_anchor_err = 0.0;
  for (std::size_t trial = 0; trial < triples; ++trial) {
    const std::size_t nvars = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    gp::Posynomial p;
    const std::size_t terms = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    for (std::size_t t = 0; t < terms; ++t) {
      gp::Monomial m;
      m.coeff = std::exp(rng.uniform(-1.5, 1.5));
      for (gp::VarId v = 0; v < nvars; ++v)
        if (rng.uniform() < 0.7) m.mul_power(v, rng.uniform(-2.0, 2.0));
      p.terms.push_back(std::move(m));
    }
    std::vector<double> anchor(nvars), probe(nvars);
    for (double& a : anchor) a = std::exp(rng.uniform(-2.0, 2.0));
    const gp::Monomial bound = gp::amgm_lower_bound(p, anchor);

    const double pa = p.eval(anchor);
    const double err = std::fabs(bound.eval(anchor) - pa) / pa;
    worst_anchor_err = std::max(worst_anchor_err, err);
    if (err > 1e-12) ++bad_anchor;

    for (double& x : probe) x = std::exp(rng.uniform(-2.0, 2.0));
    if (bound.eval(probe) > p.eval(probe) * (1.0 + 1e-12)) ++bad_probe;
  }
  report(2, bad_probe == 0 && bad_anchor == 0,
         fmt("%zu random (posynomial, anchor, probe) triples: %zu bound "
             "violations, %zu anchor mismatches, worst anchor error %.2e "
             "(threshold 1e-12 relative)",
             triples, bad_probe, bad_anchor, worst_anchor_err));
}

// --------------------------------------------------------------------------
// Criterion 3: GP solver vs analytic optima and the grid-search oracle.

void run_gp() {
  bool pass = true;
  std::string detail;

  struct Analytic {
    const char* name;
    gp::GpProblem prob;
    double optimum;
  };
  std::vector<Analytic> cases;
  {
    gp::GpProblem prob;  // xi * x <= 1, x >= 0.5 -> xi* = 2
    prob.num_vars = 2;
    prob.objective_var = 0;
    prob.lower = {1e-3, 0.01};
    prob.upper = {1e3, 1.0};
    gp::Posynomial c1;
    gp::Monomial m1;
    m1.mul_power(0, 1.0);
    m1.mul_power(1, 1.0);
    c1.terms.push_back(m1);
    prob.constraints.push_back(c1);
    gp::Posynomial c2;
    gp::Monomial m2;
    m2.coeff = 0.5;
    m2.mul_power(1, -1.0);
    c2.terms.push_back(m2);
    prob.constraints.push_back(c2);
    cases.push_back({"xi*x<=1 with x>=0.5", prob, 2.0});
  }
  {
    gp::GpProblem prob;  // xi / x <= 1, x / 4 <= 1 -> xi* = 4
    prob.num_vars = 2;
    prob.objective_var = 0;
    prob.lower = {1e-2, 0.1};
    prob.upper = {1e2, 10.0};
    gp::Posynomial c1;
    gp::Monomial m1;
    m1.mul_power(0, 1.0);
    m1.mul_power(1, -1.0);
    c1.terms.push_back(m1);
    prob.constraints.push_back(c1);
    gp::Posynomial c2;
    gp::Monomial m2;
    m2.coeff = 0.25;
    m2.mul_power(1, 1.0);
    c2.terms.push_back(m2);
    prob.constraints.push_back(c2);
    cases.push_back({"xi/x<=1 with x<=4", prob, 4.0});
  }
  {
    // xi * (x/2 + 1/(2x)) <= 1: the bracket is minimized at x = 1 -> xi* = 1.
    gp::GpProblem prob;
    prob.num_vars = 2;
    prob.objective_var = 0;
    prob.lower = {1e-2, 0.05};
    prob.upper = {1e2, 20.0};
    gp::Posynomial c;
    gp::Monomial m1;
    m1.coeff = 0.5;
    m1.mul_power(0, 1.0);
    m1.mul_power(1, 1.0);
    gp::Monomial m2;
    m2.coeff = 0.5;
    m2.mul_power(0, 1.0);
    m2.mul_power(1, -1.0);
    c.terms.push_back(m1);
    c.terms.push_back(m2);
    prob.constraints.push_back(c);
    cases.push_back({"xi*(x+1/x)/2<=1", prob, 1.0});
  }
  {
    gp::GpProblem prob;  // xi <= x*y with x <= 2, y <= 3 -> xi* = 6
    prob.num_vars = 3;
    prob.objective_var = 0;
    prob.lower = {1e-3, 0.1, 0.1};
    prob.upper = {1e3, 2.0, 3.0};
    gp::Posynomial c;
    gp::Monomial m;
    m.mul_power(0, 1.0);
    m.mul_power(1, -1.0);
    m.mul_power(2, -1.0);
    c.terms.push_back(m);
    prob.constraints.push_back(c);
    cases.push_back({"xi<=x*y box", prob, 6.0});
  }

  double worst_analytic = 0.0;
  for (const auto& a : cases) {
    const gp::GpSolution sol = gp::solve(a.prob, 1e-6);
    const double err = std::fabs(sol.xi - a.optimum) / a.optimum;
    worst_analytic = std::max(worst_analytic, err);
    if (sol.status != gp::SolveStatus::kOptimal || err > 1e-4) {
      pass = false;
      detail += fmt("analytic '%s': status %s err %.2e; ", a.name,
                    gp::to_string(sol.status), err);
    }
  }

  Rng rng(kMasterSeed + 3);
  double worst_random = 0.0;
  std::size_t instances = 0;
  for (std::size_t nx : {1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2,
                         3, 3, 3, 3, 3, 4, 4, 5, 5}) {
    const gp_test::RandomGp g = gp_test::make_random_gp(rng, nx);
    const double oracle = gp_test::grid_search_oracle(g);
    const gp::GpSolution sol = gp::solve(g.prob, 1e-6);
    const double err = std::fabs(sol.xi - oracle) / oracle;
    worst_random = std::max(worst_random, err);
    ++instances;
    if (sol.status != gp::SolveStatus::kOptimal || err > 1e-3) {
      pass = false;
      detail += fmt("random gp #%zu (nx=%zu): status %s err %.2e; ",
                    instances, nx, gp::to_string(sol.status), err);
    }
  }
  report(3, pass,
         detail.empty()
             ? fmt("%zu analytic instances within 1e-4 (worst %.1e); %zu "
                   "random GPs vs grid oracle within 1e-3 (worst %.1e)",
                   cases.size(), worst_analytic, instances, worst_random)
             : detail);
}

// --------------------------------------------------------------------------
// Criteria 4-6: the paper-scale campaign (K = tau_p = 2, M = 300).

void run_campaign() {
  const SystemConfig sys = SystemConfig::with_uniform_powers(
      4, 2, 300, 2, 200, dbm_to_watts(-96.0), 0.2, 0.2);
  const std::size_t trials = 100;
  const std::size_t n_random_starts = 5;

  struct Trial {
    double random_se, smart_se, brute_se, proposed_se;
    std::size_t monotone_violations, runs, converged;
  };
  std::vector<Trial> results(trials);

  parallel_trials(trials, 2, [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(kMasterSeed, 40000 + t);
    const auto net = netgen::generate_network(sys, seed);
    Trial r{};

    const auto rnd = baselines::random_assignment(sys, derive_seed(seed, 11));
    r.random_se =
        closedform::se(pilot::from_assignment(rnd, sys), net, sys).min_se;

    const auto smart = baselines::smart_assignment(sys, net);
    const auto smart_alloc = pilot::from_assignment(smart, sys);
    r.smart_se = closedform::se(smart_alloc, net, sys).min_se;

    r.brute_se = baselines::brute_force(sys, net).min_se;

    std::vector<pilot::PilotAllocation> starts;
    for (std::size_t s = 0; s < n_random_starts; ++s)
      starts.push_back(
          maxmin::init_powers_random(sys, derive_seed(seed, 100 + s)));
    starts.push_back(smart_alloc);

    double best = -1.0;
    for (const auto& start : starts) {
      const auto trace = maxmin::run(sys, net, start);
      r.runs += 1;
      if (trace.converged) r.converged += 1;
      for (std::size_t i = 1; i < trace.xi_per_iter.size(); ++i)
        if (trace.xi_per_iter[i] <
            trace.xi_per_iter[i - 1] -
                1e-6 * std::max(1.0, trace.xi_per_iter[i - 1]))
          r.monotone_violations += 1;
      best = std::max(best, trace.final_min_se);
    }
    r.proposed_se = best;
    results[t] = r;
  });

  std::vector<double> random_se, smart_se, brute_se, proposed_se;
  std::size_t violations = 0, runs = 0, converged = 0;
  for (const Trial& r : results) {
    random_se.push_back(r.random_se);
    smart_se.push_back(r.smart_se);
    brute_se.push_back(r.brute_se);
    proposed_se.push_back(r.proposed_se);
    violations += r.monotone_violations;
    runs += r.runs;
    converged += r.converged;
  }

  const double frac = static_cast<double>(converged) / double(runs);
  report(4, violations == 0 && frac >= 0.9 && runs >= 100,
         fmt("%zu runs: %zu monotonicity violations (tolerance 1e-6 "
             "relative); %.1f%% reached relative change < 1e-4 within 15 "
             "iterations (threshold 90%%)",
             runs, violations, 100.0 * frac));

  const double mean_prop = mean(proposed_se);
  const double mean_brute = mean(brute_se);
  const double gap = std::fabs(mean_prop - mean_brute) / mean_brute;
  report(5, gap <= 0.05,
         fmt("%zu trials: mean min-SE proposed %.4f vs brute force %.4f "
             "b/s/Hz -> %.2f%% apart (threshold 5%%)",
             trials, mean_prop, mean_brute, 100.0 * gap));

  const double mean_smart = mean(smart_se);
  const double mean_random = mean(random_se);
  const double ratio_ps = mean_prop / mean_smart;
  const double p5_smart = bench::lower_percentile(smart_se, 0.05);
  const double p5_random = bench::lower_percentile(random_se, 0.05);
  const double ratio_sr_p5 = p5_smart / p5_random;
  const bool ordered = mean_prop >= mean_smart && mean_smart >= mean_random;
  report(6,
         ordered && ratio_ps >= 1.2 && ratio_ps <= 2.2 && ratio_sr_p5 > 2.5,
         fmt("means %.4f (proposed) >= %.4f (smart) >= %.4f (random); "
             "proposed/smart mean ratio %.2f (window [1.2, 2.2]); "
             "smart/random 95%%-likely ratio %.2f (threshold > 2.5)",
             mean_prop, mean_smart, mean_random, ratio_ps, ratio_sr_p5));
}

// --------------------------------------------------------------------------
// Criterion 7: trends in K and M.

struct ScenarioMeans {
  // Means over the expensive (paired) trial set running every method.
  double random_se = 0.0, smart_se = 0.0, proposed_se = 0.0;
  // Means over a larger trial set for the cheap closed-form baselines.
  double random_se_wide = 0.0, smart_se_wide = 0.0;
};

// Trial seeds depend only on (seed_salt, t), so sweep points sharing a salt
// are evaluated on the same networks (common random numbers).
ScenarioMeans scenario_means(std::size_t users, std::size_t antennas,
                             std::size_t trials, std::size_t wide_trials,
                             std::uint64_t seed_salt) {
  const SystemConfig sys = SystemConfig::with_uniform_powers(
      4, users, antennas, users, 200, dbm_to_watts(-96.0), 0.2, 0.2);
  const std::size_t n = std::max(trials, wide_trials);
  std::vector<ScenarioMeans> per_trial(n);
  parallel_trials(n, 2, [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(kMasterSeed, seed_salt + t);
    const auto net = netgen::generate_network(sys, seed);
    ScenarioMeans& r = per_trial[t];
    r.random_se = closedform::se(
                      pilot::from_assignment(
                          baselines::random_assignment(sys,
                                                       derive_seed(seed, 11)),
                          sys),
                      net, sys)
                      .min_se;
    const auto smart_alloc =
        pilot::from_assignment(baselines::smart_assignment(sys, net), sys);
    r.smart_se = closedform::se(smart_alloc, net, sys).min_se;
    if (t >= trials) return;  // wide tail: baselines only

    double best = -1.0;
    for (std::size_t s = 0; s < 5; ++s) {
      const auto trace = maxmin::run(
          sys, net,
          maxmin::init_powers_random(sys, derive_seed(seed, 100 + s)));
      best = std::max(best, trace.final_min_se);
    }
    best = std::max(best, maxmin::run(sys, net, smart_alloc).final_min_se);
    r.proposed_se = best;
  });
  ScenarioMeans out;
  for (std::size_t t = 0; t < n; ++t) {
    out.random_se_wide += per_trial[t].random_se / double(n);
    out.smart_se_wide += per_trial[t].smart_se / double(n);
    if (t < trials) {
      out.random_se += per_trial[t].random_se / double(trials);
      out.smart_se += per_trial[t].smart_se / double(trials);
      out.proposed_se += per_trial[t].proposed_se / double(trials);
    }
  }
  return out;
}

void run_trends() {
  // K sweep: tau_p = K, M = 300, shared trial seeds across K.
  const std::size_t k_values[] = {2, 4, 6};
  ScenarioMeans k_means[3];
  for (int i = 0; i < 3; ++i)
    k_means[i] = scenario_means(k_values[i], 300, 12, 160, 50000);

  bool decreasing = true, ratio_up = true;
  double ratios[3];
  for (int i = 0; i < 3; ++i)
    ratios[i] = k_means[i].proposed_se / k_means[i].random_se;
  for (int i = 1; i < 3; ++i) {
    if (!(k_means[i].proposed_se < k_means[i - 1].proposed_se &&
          k_means[i].smart_se_wide < k_means[i - 1].smart_se_wide &&
          k_means[i].random_se_wide < k_means[i - 1].random_se_wide))
      decreasing = false;
    if (!(ratios[i] > ratios[i - 1])) ratio_up = false;
  }

  // M sweep: K = tau_p = 4, the same networks at every antenna count.
  const std::size_t m_values[] = {100, 300, 900};
  ScenarioMeans m_means[3];
  for (int i = 0; i < 3; ++i)
    m_means[i] = scenario_means(4, m_values[i], 10, 160, 60000);

  bool increasing = true;
  for (int i = 1; i < 3; ++i)
    if (!(m_means[i].proposed_se > m_means[i - 1].proposed_se &&
          m_means[i].smart_se_wide > m_means[i - 1].smart_se_wide &&
          m_means[i].random_se_wide > m_means[i - 1].random_se_wide))
      increasing = false;
  const bool band_lo =
      m_means[0].random_se_wide >= 0.04 && m_means[0].random_se_wide <= 0.12;
  const bool band_hi =
      m_means[2].random_se_wide >= 0.11 && m_means[2].random_se_wide <= 0.33;

  report(7,
         decreasing && ratio_up && increasing && band_lo && band_hi,
         fmt("K sweep (proposed): %.3f > %.3f > %.3f b/s/Hz%s; "
             "proposed/random ratio %.2f -> %.2f -> %.2f%s; M sweep "
             "(random, 160 drops): %.3f < %.3f < %.3f b/s/Hz%s, endpoints "
             "within +-50%% of 0.08/0.22: %s/%s",
             k_means[0].proposed_se, k_means[1].proposed_se,
             k_means[2].proposed_se, decreasing ? "" : " (NOT decreasing)",
             ratios[0], ratios[1], ratios[2],
             ratio_up ? "" : " (NOT increasing)", m_means[0].random_se_wide,
             m_means[1].random_se_wide, m_means[2].random_se_wide,
             increasing ? "" : " (NOT increasing)", band_lo ? "yes" : "NO",
             band_hi ? "yes" : "NO"));
}

// --------------------------------------------------------------------------
// Criterion 8: byte-identical CSV outputs from the CLI.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<missing " + p.string() + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void run_determinism() {
  const char* env = std::getenv("PILOTOPT_BIN");
  fs::path binary = env ? fs::path(env) : fs::path();
  if (binary.empty() || !fs::exists(binary)) {
    for (const char* guess :
         {"build/tools/pilotopt", "../tools/pilotopt", "tools/pilotopt"}) {
      if (fs::exists(guess)) {
        binary = guess;
        break;
      }
    }
  }
  if (binary.empty() || !fs::exists(binary)) {
    report(8, false, "pilotopt binary not found (set PILOTOPT_BIN)");
    return;
  }

  const fs::path dir = fs::temp_directory_path() / "pilotopt_acceptance8";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  {
    std::ofstream out(config);
    out << R"({
      "antennas": 60,
      "trials": 6,
      "master_seed": 4242,
      "multi_start_random": 2,
      "max_iterations": 6
    })";
  }

  auto run_once = [&](const std::string& out_dir, int workers) {
    const std::string cmd = binary.string() + " run --config " +
                            config.string() + " --out " + (dir / out_dir).string() +
                            " --workers " + std::to_string(workers) +
                            " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const bool ok =
      run_once("a", 2) && run_once("b", 2) && run_once("c", 1);
  if (!ok) {
    report(8, false, "pilotopt run invocation failed");
    return;
  }

  bool identical = true;
  std::string first_diff;
  for (const char* name :
       {"trials.csv", "cdf_random.csv", "cdf_smart.csv", "cdf_brute.csv",
        "cdf_proposed.csv", "summary.csv"}) {
    const std::string a = slurp(dir / "a" / name);
    const std::string b = slurp(dir / "b" / name);
    const std::string c = slurp(dir / "c" / name);
    if (a != b || a != c) {
      identical = false;
      if (first_diff.empty()) first_diff = name;
    }
  }
  report(8, identical,
         identical
             ? "two identical runs (plus a single-worker rerun) produced "
               "byte-identical CSV outputs"
             : "outputs differ, first difference in " + first_diff);
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string group = argc > 1 ? argv[1] : "all";
  const bool all = group == "all";
  if (all || group == "oracle") run_oracle();
  if (all || group == "amgm") run_amgm();
  if (all || group == "gp") run_gp();
  if (all || group == "campaign") run_campaign();
  if (all || group == "trends") run_trends();
  if (all || group == "determinism") run_determinism();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all checked criteria passed\n");
  return 0;
}
