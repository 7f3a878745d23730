/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "pilotopt/closedform.hpp"
#include "pilotopt/gp.hpp"
#include "pilotopt/rng.hpp"

namespace pilotopt::baselines {

namespace {

void require_enough_pilots(const SystemConfig& cfg, const char* who) {
  if (cfg.pilot_len < cfg.users_per_cell)
    throw std::invalid_argument(std::string(who) +
                                ": needs tau_p >= users per cell");
}

pilot::PilotAssignment equal_power_skeleton(const SystemConfig& cfg) {
  pilot::PilotAssignment a;
  a.num_cells = cfg.num_cells;
  a.users_per_cell = cfg.users_per_cell;
  a.pilot_len = cfg.pilot_len;
  a.pilot_index.assign(cfg.num_users(), 0);
  a.power_w = cfg.pilot_power_max_w;  // the paper-style equal pilot power
  return a;
}

}  // namespace

pilot::PilotAssignment random_assignment(const SystemConfig& cfg,
                                         std::uint64_t seed) {
  cfg.validate();
  require_enough_pilots(cfg, "random_assignment");
  pilot::PilotAssignment a = equal_power_skeleton(cfg);
  Rng rng(seed);
  std::vector<std::size_t> pool(cfg.pilot_len);
  for (std::size_t l = 0; l < cfg.num_cells; ++l) {
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates: the first K slots become a uniform injective map.
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      const std::size_t j =
          k + static_cast<std::size_t>(rng.uniform() *
                                       static_cast<double>(pool.size() - k));
      std::swap(pool[k], pool[std::min(j, pool.size() - 1)]);
      a.pilot_index[a.user_index(l, k)] = pool[k];
    }
  }
  return a;
}

pilot::PilotAssignment smart_assignment(const SystemConfig& cfg,
                                        const netgen::NetworkRealization& net) {
  cfg.validate();
  require_enough_pilots(cfg, "smart_assignment");
  pilot::PilotAssignment a = equal_power_skeleton(cfg);
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k)
      a.pilot_index[cfg.user_index(l, k)] = k;

  double kfact = 1.0;
  for (std::size_t i = 2; i <= cfg.users_per_cell; ++i)
    kfact *= static_cast<double>(i);

  if (cfg.num_cells > 1 && kfact <= 5040.0) {
    // Coordinate descent on the exact equal-power min-SE: each cell in turn
    // adopts the pilot permutation that maximizes the network-wide minimum,
    // holding the other cells fixed, until a full sweep changes nothing.
    // Everything involved is determined by the large-scale coefficients.
    constexpr std::size_t kMaxSweeps = 4;
    for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
      bool changed = false;
      for (std::size_t l = 0; l < cfg.num_cells; ++l) {
        std::vector<std::size_t> perm(cfg.users_per_cell);
        std::iota(perm.begin(), perm.end(), 0);
        double best = -1.0;
        std::vector<std::size_t> best_perm = perm;
        do {
          for (std::size_t k = 0; k < cfg.users_per_cell; ++k)
            a.pilot_index[cfg.user_index(l, k)] = perm[k];
          const double v =
              closedform::se(pilot::from_assignment(a, cfg), net, cfg).min_se;
          if (v > best) {
            best = v;
            best_perm = perm;
          }
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
          const std::size_t u = cfg.user_index(l, k);
          if (a.pilot_index[u] != best_perm[k]) changed = true;
          a.pilot_index[u] = best_perm[k];
        }
      }
      if (!changed) break;
    }
    return a;
  }

  // Large user counts: greedy sweeps with a pairwise contamination-pressure
  // surrogate. Weakest home user picks first; a second sweep lets the
  // first cells react to the rest of the network.
  const std::size_t users = cfg.num_users();
  std::vector<bool> assigned(users, false);
  std::vector<std::size_t> order(cfg.users_per_cell);
  for (std::size_t sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t l = 0; l < cfg.num_cells; ++l) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) {
                         return net.beta_at(l, l, x) < net.beta_at(l, l, y);
                       });
      for (std::size_t k = 0; k < cfg.users_per_cell; ++k)
        assigned[cfg.user_index(l, k)] = false;
      std::vector<bool> used(cfg.pilot_len, false);
      for (const std::size_t k : order) {
        double best_score = std::numeric_limits<double>::infinity();
        std::size_t best_pilot = cfg.pilot_len;
        for (std::size_t b = 0; b < cfg.pilot_len; ++b) {
          if (used[b]) continue;
          double score = 0.0;
          for (std::size_t i = 0; i < cfg.num_cells; ++i) {
            if (i == l) continue;
            for (std::size_t t = 0; t < cfg.users_per_cell; ++t) {
              const std::size_t v = cfg.user_index(i, t);
              if (!assigned[v] || a.pilot_index[v] != b) continue;
              score += net.beta_at(l, i, t) * net.beta_at(i, l, k);
            }
          }
          // Prefer the user's own index on ties; single-cell networks then
          // reduce to the identity mapping.
          if (score < best_score ||
              (score == best_score && b == k && best_pilot != k)) {
            best_score = score;
            best_pilot = b;
          }
        }
        const std::size_t u = cfg.user_index(l, k);
        a.pilot_index[u] = best_pilot;
        assigned[u] = true;
        used[best_pilot] = true;
      }
    }
  }
  return a;
}

BruteForceResult brute_force(const SystemConfig& cfg,
                             const netgen::NetworkRealization& net,
                             const BruteForceOptions& opt) {
  cfg.validate();
  if (cfg.pilot_len != cfg.users_per_cell)
    throw std::invalid_argument("brute_force: requires tau_p == K");
  const std::size_t K = cfg.users_per_cell;
  const std::size_t free_cells =
      opt.fix_first_cell ? cfg.num_cells - 1 : cfg.num_cells;

  double kfact = 1.0;
  for (std::size_t i = 2; i <= K; ++i) kfact *= static_cast<double>(i);
  const double classes_d = std::pow(kfact, static_cast<double>(free_cells));
  if (classes_d > static_cast<double>(opt.enumeration_cap))
    throw std::invalid_argument(
        "brute_force: " + std::to_string(classes_d) +
        " permutation classes exceed the enumeration cap of " +
        std::to_string(opt.enumeration_cap));
  const std::size_t classes = static_cast<std::size_t>(classes_d);

  // Decode class index -> per-cell permutation via factorial digits.
  std::vector<std::vector<std::size_t>> perms;
  {
    std::vector<std::size_t> p(K);
    std::iota(p.begin(), p.end(), 0);
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  }

  struct ClassOutcome {
    double min_se = -1.0;
    std::vector<double> powers;
    std::size_t cls = 0;
  };
  std::vector<ClassOutcome> outcomes(classes);
  std::vector<pilot::PilotAssignment> assigns(classes);

  auto evaluate_class = [&](std::size_t cls) {
    pilot::PilotAssignment a = equal_power_skeleton(cfg);
    std::size_t rem = cls;
    for (std::size_t l = 0; l < cfg.num_cells; ++l) {
      std::size_t which = 0;
      if (!(opt.fix_first_cell && l == 0)) {
        which = rem % perms.size();
        rem /= perms.size();
      }
      for (std::size_t k = 0; k < K; ++k)
        a.pilot_index[a.user_index(l, k)] = perms[which][k];
    }
    const gp::GpProblem prob = gp::build_assignment_gp(a, net, cfg);
    const gp::GpSolution sol = gp::solve(prob, opt.gp_tol);
    for (std::size_t u = 0; u < cfg.num_users(); ++u)
      a.power_w[u] = sol.values[1 + u];
    const pilot::PilotAllocation alloc = gp::snap_small_to_zero(
        pilot::from_assignment(a, cfg), cfg);
    outcomes[cls].min_se = closedform::se(alloc, net, cfg).min_se;
    outcomes[cls].powers = a.power_w;
    outcomes[cls].cls = cls;
    assigns[cls] = std::move(a);
  };

  if (opt.workers <= 1 || classes == 1) {
    for (std::size_t c = 0; c < classes; ++c) evaluate_class(c);
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= classes) break;
        evaluate_class(c);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min(opt.workers, classes);
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // Ordered reduction keeps the winner independent of thread scheduling.
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c)
    if (outcomes[c].min_se > outcomes[best].min_se) best = c;

  BruteForceResult result;
  result.assignment = std::move(assigns[best]);
  result.min_se = outcomes[best].min_se;
  result.classes_evaluated = classes;
  return result;
}

}  // namespace pilotopt::baselines
