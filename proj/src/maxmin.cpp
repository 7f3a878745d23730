/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/maxmin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pilotopt/rng.hpp"

namespace pilotopt::maxmin {

pilot::PilotAllocation init_powers_random(const SystemConfig& cfg,
                                          std::uint64_t seed) {
  cfg.validate();
  const double floor = gp::power_floor(cfg);
  pilot::PilotAllocation alloc = pilot::PilotAllocation::zeros(cfg);
  Rng rng(seed);
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      double sum = 0.0;
      for (std::size_t b = 0; b < cfg.pilot_len; ++b) {
        const double p = rng.uniform(floor, cfg.pilot_power_max(l, k));
        alloc.at(l, k, b) = p;
        sum += p;
      }
      const double cap =
          static_cast<double>(cfg.pilot_len) * cfg.pilot_power_max(l, k);
      if (sum > cap)
        for (std::size_t b = 0; b < cfg.pilot_len; ++b)
          alloc.at(l, k, b) *= cap / sum;
    }
  return alloc;
}

pilot::PilotAllocation init_powers_warm(const SystemConfig& cfg,
                                        const pilot::PilotAllocation& start) {
  if (!pilot::validate(start, cfg).empty())
    throw std::invalid_argument(
        "init_powers_warm: warm-start allocation is infeasible");
  const double floor = gp::power_floor(cfg);
  pilot::PilotAllocation alloc = start;
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      auto row = alloc.row(l, k);
      double sum = 0.0;
      for (double& p : row) {
        p = std::max(p, floor);
        sum += p;
      }
      // Shave flooring excess off the largest entry to preserve the budget.
      const double cap =
          static_cast<double>(cfg.pilot_len) * cfg.pilot_power_max(l, k);
      if (sum > cap) {
        auto it = std::max_element(row.begin(), row.end());
        *it -= sum - cap;
      }
    }
  return alloc;
}

closedform::Weights update_weights(const pilot::PilotAllocation& alloc) {
  closedform::Weights w;
  w.num_cells = alloc.num_cells;
  w.users_per_cell = alloc.users_per_cell;
  w.pilot_len = alloc.pilot_len;
  w.alpha.assign(alloc.power_w.size(), 0.0);
  for (std::size_t l = 0; l < alloc.num_cells; ++l)
    for (std::size_t k = 0; k < alloc.users_per_cell; ++k) {
      const double sum = alloc.row_sum(l, k);
      if (!(sum > 0.0))
        throw std::invalid_argument("update_weights: all-zero power row");
      for (std::size_t b = 0; b < alloc.pilot_len; ++b)
        w.at(l, k, b) = alloc.at(l, k, b) / sum;
    }
  return w;
}

IterationTrace run(const SystemConfig& cfg,
                   const netgen::NetworkRealization& net,
                   const pilot::PilotAllocation& init, const RunOptions& opt) {
  if (opt.max_iterations < 1)
    throw std::invalid_argument("run: need at least one iteration");
  pilot::PilotAllocation current = init_powers_warm(cfg, init);

  IterationTrace trace;
  bool solver_ok = true;
  double growth_hint = 0.35;
  for (std::size_t i = 0; i < opt.max_iterations; ++i) {
    const closedform::Weights w = update_weights(current);
    if (opt.keep_weight_history) trace.weight_history.push_back(w);

    gp::GpProblem prob = gp::build_maxmin_gp(current, net, cfg, w);
    prob.growth_hint = growth_hint;
    const gp::GpSolution sol = gp::solve(prob, opt.gp_tol);
    if (sol.status == gp::SolveStatus::kInfeasible) {
      solver_ok = false;  // keep the last good allocation
      break;
    }
    trace.iterations = i + 1;
    trace.xi_per_iter.push_back(sol.xi);
    for (std::size_t u = 0; u < cfg.num_users(); ++u)
      for (std::size_t b = 0; b < cfg.pilot_len; ++b)
        current.power_w[u * cfg.pilot_len + b] =
            sol.values[gp::power_var(u, b, cfg.pilot_len)];
    if (opt.keep_allocation_history) trace.allocation_history.push_back(current);

    if (i >= 1) {
      const double prev = trace.xi_per_iter[i - 1];
      const double change = std::fabs(sol.xi - prev);
      // Expected next improvement seeds the next bisection's first step.
      growth_hint = std::max(2.0 * change / std::max(prev, 1e-300), 1e-5);
      if (change < opt.stop_tol * std::max(prev, 1e-300)) {
        trace.converged = true;
        break;
      }
    }
  }
  if (!solver_ok) trace.converged = false;

  trace.final_alloc = gp::snap_small_to_zero(current, cfg);
  trace.final_min_se = closedform::se(trace.final_alloc, net, cfg).min_se;
  return trace;
}

}  // namespace pilotopt::maxmin
