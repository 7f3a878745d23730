/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <vector>

#include "pilotopt/netgen.hpp"
#include "pilotopt/pilot.hpp"
#include "pilotopt/types.hpp"

namespace pilotopt::baselines {

/// Universal random pilot assignment: an independent uniform injective
/// pilot mapping per cell, every user at the equal pilot power P_max.
/// Requires tau_p >= K.
pilot::PilotAssignment random_assignment(const SystemConfig& cfg,
                                         std::uint64_t seed);

/// Greedy interference-aware assignment built only from large-scale fading:
/// cells in order, users within a cell by descending home-BS gain, each user
/// taking the free pilot with the least accumulated cross-cell
/// contamination pressure sum (beta_other_user_at_home_bs *
/// beta_this_user_at_other_bs). Deterministic; single-cell networks get the
/// identity mapping. Requires tau_p >= K.
pilot::PilotAssignment smart_assignment(const SystemConfig& cfg,
                                        const netgen::NetworkRealization& net);

struct BruteForceOptions {
  std::size_t enumeration_cap = 10000;
  /// Fix the first cell's permutation to the identity (global pilot
  /// relabeling loses no generality).
  bool fix_first_cell = true;
  double gp_tol = 1e-6;
  std::size_t workers = 1;
};

struct BruteForceResult {
  pilot::PilotAssignment assignment;  // carries the optimized pilot powers
  double min_se = 0.0;                // exact closed-form evaluation
  std::size_t classes_evaluated = 0;
};

/// Enumerates per-cell pilot permutations (tau_p == K required) and solves
/// the exact power-control geometric program for each; returns the best
/// combination by exact min-SE. Throws when the class count exceeds the cap.
BruteForceResult brute_force(const SystemConfig& cfg,
                             const netgen::NetworkRealization& net,
                             const BruteForceOptions& opt = {});

}  // namespace pilotopt::baselines
