/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <vector>

#include "pilotopt/netgen.hpp"
#include "pilotopt/pilot.hpp"
#include "pilotopt/types.hpp"

namespace pilotopt::closedform {

/// Per-user channel-estimate variance, SINR and spectral efficiency under
/// MR detection, for one pilot allocation.
struct SinrReport {
  std::size_t num_cells = 0;
  std::size_t users_per_cell = 0;
  std::vector<double> gamma;  // estimate variance, linear gain, (l, k)
  std::vector<double> sinr;   // (l, k)
  std::vector<double> se;     // bits/s/Hz, (l, k)
  double min_se = 0.0;
  double prelog = 0.0;  // 1 - tau_p / tau_c

  double at(const std::vector<double>& v, std::size_t l, std::size_t k) const {
    return v[l * users_per_cell + k];
  }
};

/// AM-GM weights for the monomial lower bound on each user's total pilot
/// power: nonnegative, summing to one over the basis index per user.
struct Weights {
  std::size_t num_cells = 0;
  std::size_t users_per_cell = 0;
  std::size_t pilot_len = 0;
  std::vector<double> alpha;  // (l, k, b)

  double at(std::size_t l, std::size_t k, std::size_t b) const {
    return alpha[(l * users_per_cell + k) * pilot_len + b];
  }
  double& at(std::size_t l, std::size_t k, std::size_t b) {
    return alpha[(l * users_per_cell + k) * pilot_len + b];
  }
};

/// MMSE channel-estimate variance gamma for user (l, k): the fraction of the
/// large-scale gain captured by the estimate. Always in (0, beta_home) for
/// positive noise. Throws std::invalid_argument if the user sends no pilot
/// power.
double estimate_variance(const pilot::PilotAllocation& alloc,
                         const netgen::NetworkRealization& net,
                         const SystemConfig& cfg, std::size_t l,
                         std::size_t k);

/// Closed-form uplink SINR of user (l, k) under MR detection with arbitrary
/// pilot power splits. Numerator grows linearly in the antenna count; the
/// denominator combines non-coherent interference plus noise with the
/// coherent pilot-contamination term.
double sinr_closed_form(const pilot::PilotAllocation& alloc,
                        const netgen::NetworkRealization& net,
                        const SystemConfig& cfg, std::size_t l,
                        std::size_t k);

/// Full report for all users: gamma, SINR, SE = prelog * log2(1 + SINR),
/// and the network-wide minimum SE.
SinrReport se(const pilot::PilotAllocation& alloc,
              const netgen::NetworkRealization& net, const SystemConfig& cfg);

/// SINR lower bound: the numerator's squared total pilot power is replaced
/// by the weighted geometric-mean monomial prod_b (p_b / alpha_b)^(2 alpha_b)
/// with the convention 0^0 = 1. Equals sinr_closed_form when the weights are
/// proportional to the power row itself, and never exceeds it for any valid
/// weights. Throws std::invalid_argument when alpha_b > 0 on a zero-power
/// basis entry.
double sinr_approx(const pilot::PilotAllocation& alloc,
                   const netgen::NetworkRealization& net,
                   const SystemConfig& cfg, const Weights& w, std::size_t l,
                   std::size_t k);

}  // namespace pilotopt::closedform
