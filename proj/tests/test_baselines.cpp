/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include <stdexcept>

#include <doctest.h>

#include "pilotopt/baselines.hpp"
#include "pilotopt/closedform.hpp"
#include "pilotopt/gp.hpp"
#include "pilotopt/netgen.hpp"
#include "pilotopt/pilot.hpp"
#include "pilotopt/types.hpp"

using namespace pilotopt;

namespace {

SystemConfig paper_config(std::size_t antennas = 300) {
  return SystemConfig::with_uniform_powers(4, 2, antennas, 2, 200,
                                           dbm_to_watts(-96.0), 0.2, 0.2);
}

netgen::NetworkRealization two_cell_network(double strong, double weak) {
  // Two cells, two users each. Users 0 of both cells sit at the cell edge:
  // weak at home, loud at the neighboring BS. Pairing them on one pilot
  // wrecks both; each can share with the other cell's interior user at
  // negligible cost.
  netgen::NetworkRealization net;
  net.num_cells = 2;
  net.users_per_cell = 2;
  net.area_side_km = 1.0;
  net.bs_x_km = {0.25, 0.75};
  net.bs_y_km = {0.5, 0.5};
  net.user_x_km.assign(4, 0.0);
  net.user_y_km.assign(4, 0.0);
  net.distance_km.assign(8, 0.1);
  net.shadow_db.assign(8, 0.0);
  net.beta.assign(8, weak);
  auto set_beta = [&](std::size_t bs, std::size_t cell, std::size_t user,
                      double v) { net.beta[net.link_index(bs, cell, user)] = v; };
  set_beta(0, 0, 0, 0.5);
  set_beta(0, 0, 1, 1.0);
  set_beta(1, 1, 0, 0.5);
  set_beta(1, 1, 1, 1.0);
  set_beta(0, 1, 0, strong);  // user (1,0) heard loudly at BS 0
  set_beta(1, 0, 0, strong);  // user (0,0) heard loudly at BS 1
  return net;
}

double assignment_min_se_with_optimal_powers(
    const pilot::PilotAssignment& assign, const netgen::NetworkRealization& net,
    const SystemConfig& cfg) {
  const gp::GpProblem prob = gp::build_assignment_gp(assign, net, cfg);
  const gp::GpSolution sol = gp::solve(prob, 1e-6);
  pilot::PilotAssignment tuned = assign;
  for (std::size_t u = 0; u < cfg.num_users(); ++u)
    tuned.power_w[u] = sol.values[1 + u];
  const auto alloc =
      gp::snap_small_to_zero(pilot::from_assignment(tuned, cfg), cfg);
  return closedform::se(alloc, net, cfg).min_se;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("random assignment: injective, equal power, reproducible") {
  const SystemConfig cfg = paper_config();
  const auto a = baselines::random_assignment(cfg, 4);
  const auto b = baselines::random_assignment(cfg, 4);
  CHECK(a.pilot_index == b.pilot_index);
  for (std::size_t l = 0; l < cfg.num_cells; ++l) {
    std::set<std::size_t> used;
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      used.insert(a.pilot_of(l, k));
      CHECK(a.power_of(l, k) == 0.2);
    }
    CHECK(used.size() == cfg.users_per_cell);
  }
  CHECK(pilot::validate(pilot::from_assignment(a, cfg), cfg).empty());
}

TEST_CASE("random assignment covers both per-cell permutations") {
  const SystemConfig cfg = paper_config();
  std::array<std::size_t, 2> counts{0, 0};
  for (std::uint64_t seed = 0; seed < 600; ++seed) {
    const auto a = baselines::random_assignment(cfg, seed);
    counts[a.pilot_of(0, 0)] += 1;
  }
  CHECK(counts[0] > 200);
  CHECK(counts[1] > 200);
}

TEST_CASE("too few pilots are rejected") {
  const SystemConfig cfg = SystemConfig::with_uniform_powers(
      4, 3, 300, 2, 200, dbm_to_watts(-96.0), 0.2, 0.2);
  CHECK_THROWS_AS(baselines::random_assignment(cfg, 1), std::invalid_argument);
  const auto net = netgen::generate_network(paper_config(), 1);
  CHECK_THROWS_AS(baselines::smart_assignment(cfg, net),
                  std::invalid_argument);
}

TEST_CASE("smart assignment is the identity in a single cell") {
  const SystemConfig cfg = SystemConfig::with_uniform_powers(
      1, 4, 300, 4, 200, dbm_to_watts(-96.0), 0.2, 0.2);
  const auto net = netgen::generate_network(cfg, 33);
  const auto a = baselines::smart_assignment(cfg, net);
  for (std::size_t k = 0; k < 4; ++k) CHECK(a.pilot_of(0, k) == k);
}

TEST_CASE("smart assignment splits a strongly interfering edge pair") {
  const SystemConfig cfg = SystemConfig::with_uniform_powers(
      2, 2, 300, 2, 200, 1.0, 0.2, 0.2);
  const auto net = two_cell_network(0.4, 0.01);
  const auto a = baselines::smart_assignment(cfg, net);
  CHECK(a.pilot_of(1, 0) != a.pilot_of(0, 0));

  // Exhaustive check over the four assignments: splitting the edge pair is
  // the exact equal-power optimum, and the heuristic attains it.
  double best = -1.0, smart_value = -1.0;
  for (std::size_t p00 = 0; p00 < 2; ++p00)
    for (std::size_t p10 = 0; p10 < 2; ++p10) {
      pilot::PilotAssignment cand;
      cand.num_cells = 2;
      cand.users_per_cell = 2;
      cand.pilot_len = 2;
      cand.pilot_index = {p00, 1 - p00, p10, 1 - p10};
      cand.power_w.assign(4, 0.2);
      const double v =
          closedform::se(pilot::from_assignment(cand, cfg), net, cfg).min_se;
      best = std::max(best, v);
      if (p00 != p10) smart_value = std::max(smart_value, v);  // split classes
    }
  CHECK(smart_value == doctest::Approx(best));
  const double achieved =
      closedform::se(pilot::from_assignment(a, cfg), net, cfg).min_se;
  CHECK(achieved == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("smart assignment is deterministic and beats random on average") {
  const SystemConfig cfg = paper_config();
  double smart_total = 0.0, random_total = 0.0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto net = netgen::generate_network(cfg, 100 + seed);
    const auto s1 = baselines::smart_assignment(cfg, net);
    const auto s2 = baselines::smart_assignment(cfg, net);
    CHECK(s1.pilot_index == s2.pilot_index);
    smart_total +=
        closedform::se(pilot::from_assignment(s1, cfg), net, cfg).min_se;
    random_total +=
        closedform::se(pilot::from_assignment(
                           baselines::random_assignment(cfg, seed), cfg),
                       net, cfg)
            .min_se;
  }
  CHECK(smart_total > random_total);
}

TEST_CASE("single-cell brute force collapses to the power-only program") {
  const SystemConfig cfg = SystemConfig::with_uniform_powers(
      1, 2, 300, 2, 200, dbm_to_watts(-96.0), 0.2, 0.2);
  const auto net = netgen::generate_network(cfg, 60);
  const auto result = baselines::brute_force(cfg, net);
  CHECK(result.classes_evaluated == 1);

  pilot::PilotAssignment identity;
  identity.num_cells = 1;
  identity.users_per_cell = 2;
  identity.pilot_len = 2;
  identity.pilot_index = {0, 1};
  identity.power_w = {0.2, 0.2};
  const double direct =
      assignment_min_se_with_optimal_powers(identity, net, cfg);
  CHECK(std::fabs(result.min_se - direct) / direct < 1e-6);
}

TEST_CASE("paper-scale brute force enumerates eight classes") {
  const SystemConfig cfg = paper_config();
  const auto net = netgen::generate_network(cfg, 61);
  const auto result = baselines::brute_force(cfg, net);
  CHECK(result.classes_evaluated == 8);
  CHECK(result.min_se > 0.0);
  CHECK(pilot::validate(pilot::from_assignment(result.assignment, cfg), cfg)
            .empty());

  // The smart assignment's class is inside the enumeration.
  const auto smart = baselines::smart_assignment(cfg, net);
  const double smart_tuned =
      assignment_min_se_with_optimal_powers(smart, net, cfg);
  CHECK(result.min_se >= smart_tuned * (1.0 - 1e-6));
}

TEST_CASE("fixing the first cell loses nothing (relabeling symmetry)") {
  const SystemConfig cfg = SystemConfig::with_uniform_powers(
      4, 2, 100, 2, 200, dbm_to_watts(-96.0), 0.2, 0.2);
  const auto net = netgen::generate_network(cfg, 62);
  baselines::BruteForceOptions fixed;
  baselines::BruteForceOptions full;
  full.fix_first_cell = false;
  const auto a = baselines::brute_force(cfg, net, fixed);
  const auto b = baselines::brute_force(cfg, net, full);
  CHECK(a.classes_evaluated == 8);
  CHECK(b.classes_evaluated == 16);
  CHECK(std::fabs(a.min_se - b.min_se) / b.min_se < 1e-6);
}

TEST_CASE("brute force preconditions") {
  {
    const SystemConfig cfg = SystemConfig::with_uniform_powers(
        4, 2, 300, 3, 200, dbm_to_watts(-96.0), 0.2, 0.2);
    const auto net = netgen::generate_network(cfg, 63);
    CHECK_THROWS_AS(baselines::brute_force(cfg, net), std::invalid_argument);
  }
  {
    const SystemConfig cfg = paper_config();
    const auto net = netgen::generate_network(cfg, 64);
    baselines::BruteForceOptions opt;
    opt.enumeration_cap = 4;  // eight classes exceed this
    CHECK_THROWS_AS(baselines::brute_force(cfg, net, opt),
                    std::invalid_argument);
  }
}

}  // TEST_SUITE
