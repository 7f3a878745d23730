/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pilotopt/types.hpp"

namespace pilotopt::pilot {

/// Nonnegative pilot power split over the tau_p orthonormal basis vectors,
/// one row per user. The basis itself is never materialized here: every
/// closed-form quantity depends only on these powers. Zero entries are kept
/// as exact zeros; epsilon flooring is a GP-solver concern.
struct PilotAllocation {
  std::size_t num_cells = 0;
  std::size_t users_per_cell = 0;
  std::size_t pilot_len = 0;

  /// Power on basis vector b for user (l, k), watts, indexed (l, k, b).
  std::vector<double> power_w;

  static PilotAllocation zeros(const SystemConfig& cfg) {
    PilotAllocation a;
    a.num_cells = cfg.num_cells;
    a.users_per_cell = cfg.users_per_cell;
    a.pilot_len = cfg.pilot_len;
    a.power_w.assign(a.num_cells * a.users_per_cell * a.pilot_len, 0.0);
    return a;
  }

  std::size_t num_users() const { return num_cells * users_per_cell; }
  std::size_t user_index(std::size_t cell, std::size_t user) const {
    return cell * users_per_cell + user;
  }
  double& at(std::size_t cell, std::size_t user, std::size_t basis) {
    return power_w[user_index(cell, user) * pilot_len + basis];
  }
  double at(std::size_t cell, std::size_t user, std::size_t basis) const {
    return power_w[user_index(cell, user) * pilot_len + basis];
  }
  std::span<const double> row(std::size_t cell, std::size_t user) const {
    return {power_w.data() + user_index(cell, user) * pilot_len, pilot_len};
  }
  std::span<double> row(std::size_t cell, std::size_t user) {
    return {power_w.data() + user_index(cell, user) * pilot_len, pilot_len};
  }
  double row_sum(std::size_t cell, std::size_t user) const;
};

/// Orthogonal-pilot assignment: one pilot index per user, injective within
/// each cell, plus a scalar pilot power per user.
struct PilotAssignment {
  std::size_t num_cells = 0;
  std::size_t users_per_cell = 0;
  std::size_t pilot_len = 0;

  /// Assigned basis index in [0, pilot_len), indexed (l, k).
  std::vector<std::size_t> pilot_index;
  /// Scalar pilot power in watts, indexed (l, k).
  std::vector<double> power_w;

  std::size_t user_index(std::size_t cell, std::size_t user) const {
    return cell * users_per_cell + user;
  }
  std::size_t pilot_of(std::size_t cell, std::size_t user) const {
    return pilot_index[user_index(cell, user)];
  }
  double power_of(std::size_t cell, std::size_t user) const {
    return power_w[user_index(cell, user)];
  }
};

/// Squared pilot cross-correlation (sum_b sqrt(a_b * b_b))^2 between two
/// power-split rows. Zero iff the rows have disjoint support.
/// Throws std::invalid_argument on negative entries or length mismatch.
double inner_product_sq(std::span<const double> a, std::span<const double> b);

/// Expands an orthogonal assignment into the general power-split form:
/// all of each user's power lands on its assigned basis vector.
PilotAllocation from_assignment(const PilotAssignment& assign,
                                const SystemConfig& cfg);

struct PowerViolation {
  enum class Kind { kNegativeEntry, kBudgetExceeded };
  Kind kind;
  std::size_t cell;
  std::size_t user;
  /// Budget: average power minus cap (positive when violated).
  /// Negative entry: the offending power value.
  double slack_w;
};

/// Diagnostic check of nonnegativity and the average-power budget
/// (1/tau_p) * sum_b p <= P_max per user, with 1e-9 relative tolerance to
/// absorb solver round-off. Empty result means the allocation is feasible.
std::vector<PowerViolation> validate(const PilotAllocation& alloc,
                                     const SystemConfig& cfg);

}  // namespace pilotopt::pilot
