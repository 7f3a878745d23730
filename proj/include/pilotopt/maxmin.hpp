/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <vector>

#include "pilotopt/closedform.hpp"
#include "pilotopt/gp.hpp"
#include "pilotopt/netgen.hpp"
#include "pilotopt/pilot.hpp"
#include "pilotopt/types.hpp"

namespace pilotopt::maxmin {

struct RunOptions {
  std::size_t max_iterations = 15;
  /// Stop when the relative change of the achieved objective between two
  /// consecutive iterations falls below this.
  double stop_tol = 1e-4;
  double gp_tol = 1e-6;
  bool keep_weight_history = false;
  bool keep_allocation_history = false;
};

/// Full record of one successive-approximation run. The achieved objective
/// sequence is nondecreasing up to solver tolerance; the final allocation is
/// zero-snapped and its min-SE re-evaluated with the exact closed form, so
/// reported numbers never depend on the solver's positivity floor.
struct IterationTrace {
  std::vector<double> xi_per_iter;
  std::vector<closedform::Weights> weight_history;
  std::vector<pilot::PilotAllocation> allocation_history;
  std::size_t iterations = 0;
  bool converged = false;
  pilot::PilotAllocation final_alloc;
  double final_min_se = 0.0;
};

/// Random initial powers: i.i.d. uniform on [floor, P_max] per basis entry,
/// rescaled in the (measure-zero) event the average-power budget is hit.
pilot::PilotAllocation init_powers_random(const SystemConfig& cfg,
                                          std::uint64_t seed);

/// Warm start from a feasible allocation: floored to the GP positivity
/// domain, otherwise unchanged. Throws std::invalid_argument when the given
/// allocation violates the power budget.
pilot::PilotAllocation init_powers_warm(const SystemConfig& cfg,
                                        const pilot::PilotAllocation& start);

/// New AM-GM weights from the current iterate: alpha = p / sum_b p per user.
/// Throws std::invalid_argument on an all-zero power row.
closedform::Weights update_weights(const pilot::PilotAllocation& alloc);

/// Successive approximation: rebuild weights at the current iterate, solve
/// the resulting geometric program, adopt its solution, and repeat until the
/// objective stalls or the iteration cap is reached.
IterationTrace run(const SystemConfig& cfg,
                   const netgen::NetworkRealization& net,
                   const pilot::PilotAllocation& init,
                   const RunOptions& opt = {});

}  // namespace pilotopt::maxmin
