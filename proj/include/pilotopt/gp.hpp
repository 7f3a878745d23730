/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pilotopt/closedform.hpp"
#include "pilotopt/netgen.hpp"
#include "pilotopt/pilot.hpp"
#include "pilotopt/types.hpp"

namespace pilotopt::gp {

using VarId = std::uint32_t;

/// c * prod_v x_v^a_v with c > 0; exponents sparse, sorted by variable id.
struct Monomial {
  double coeff = 1.0;
  std::vector<std::pair<VarId, double>> exponents;

  /// Multiplies in x_v^e, merging with an existing exponent on v.
  void mul_power(VarId v, double e);
  double exponent_of(VarId v) const;
  double eval(std::span<const double> x) const;
};

/// Sum of monomials; all coefficients positive.
struct Posynomial {
  std::vector<Monomial> terms;
  double eval(std::span<const double> x) const;
};

/// maximize x_objective subject to posynomial constraints g(x) <= 1 and a
/// positive box on every variable. The objective variable must appear with
/// nonnegative exponents in all constraints (epigraph form), which makes
/// feasibility monotone in it.
struct GpProblem {
  std::size_t num_vars = 0;
  VarId objective_var = 0;
  std::vector<Posynomial> constraints;
  std::vector<double> lower;  // > 0
  std::vector<double> upper;
  /// Optional feasible warm point (size num_vars); its objective slot seeds
  /// the lower end of the bisection bracket.
  std::vector<double> initial;
  /// First upward step of the objective bisection, in log units. Callers
  /// that solve a sequence of related programs pass the expected
  /// improvement so nearly converged instances cost only a few probes.
  double growth_hint = 0.35;
};

enum class SolveStatus { kOptimal, kInfeasible, kMaxIterations };
const char* to_string(SolveStatus s);

struct GpSolution {
  double xi = 0.0;
  std::vector<double> values;
  SolveStatus status = SolveStatus::kInfeasible;
  /// max over constraints of log g at the returned point (<= 0 when all
  /// constraints hold).
  double kkt_residual = 0.0;
  std::size_t feasibility_probes = 0;
  std::size_t newton_iterations = 0;
};

/// Weighted AM-GM monomial lower bound of a posynomial around an anchor
/// (Lemma-style best local monomial approximation): with weights
/// alpha_b = u_b(anchor) / sum_b u_b(anchor), returns
/// prod_b (u_b(x)/alpha_b)^alpha_b, which equals p at the anchor and never
/// exceeds p on the positive orthant.
/// Throws std::invalid_argument if the anchor is not strictly positive on
/// every variable p uses.
Monomial amgm_lower_bound(const Posynomial& p, std::span<const double> anchor);

/// Maximizes the objective variable by bisection on its logarithm; each
/// candidate runs a damped-Newton minimization of the smoothed maximum of
/// the log-domain constraints (all convex after x = exp(y)). `tol` is the
/// relative width of the final objective bracket; optimal status also
/// requires the KKT residual to clear 1e-6.
GpSolution solve(const GpProblem& prob, double tol = 1e-6);

/// Positivity floor used for GP power variables (log-domain solvers cannot
/// represent exact zeros): 1e-8 times the largest per-user power cap.
double power_floor(const SystemConfig& cfg);

/// Replaces entries below 10x the GP floor with exact zeros, so reported
/// allocations never depend on floor artifacts.
pilot::PilotAllocation snap_small_to_zero(pilot::PilotAllocation alloc,
                                          const SystemConfig& cfg);

inline constexpr VarId kObjectiveVar = 0;

/// Variable id of the pilot power on basis b for flat user u in the
/// max-min problem layout (objective variable is id 0).
inline VarId power_var(std::size_t flat_user, std::size_t basis,
                       std::size_t pilot_len) {
  return static_cast<VarId>(1 + flat_user * pilot_len + basis);
}

/// Builds the max-min SINR program around an anchor allocation: variables
/// are the objective and every per-basis pilot power; per-user constraints
/// bound objective * denominator / monomial-numerator by 1, with the
/// squared pilot overlaps expanded symbolically into monomial cross terms;
/// per-user average-power budgets complete the program. All channel data is
/// pre-divided by the noise power.
GpProblem build_maxmin_gp(const pilot::PilotAllocation& anchor,
                          const netgen::NetworkRealization& net,
                          const SystemConfig& cfg,
                          const closedform::Weights& w);

/// Exact power-control program for a fixed orthogonal assignment: one
/// scalar power variable per user (diagonal pilot structure), so the SINR
/// numerator is already a monomial and no successive approximation is
/// needed. Variable 1 + u is the scalar power of flat user u.
GpProblem build_assignment_gp(const pilot::PilotAssignment& assign,
                              const netgen::NetworkRealization& net,
                              const SystemConfig& cfg);

/// Plain-text listing of every monomial (coefficient + exponent map per
/// line) for diffing against external modeling tools.
std::string dump(const GpProblem& prob);

}  // namespace pilotopt::gp
