/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "pilotopt/netgen.hpp"
#include "pilotopt/pilot.hpp"
#include "pilotopt/rng.hpp"
#include "pilotopt/types.hpp"

namespace pilotopt::mcoracle {

using Complex = std::complex<double>;

/// One link-level draw as seen by a single BS: Rayleigh channels from every
/// user, pilot-phase noise, data-phase noise and unit-variance data symbols.
/// Channel entries are i.i.d. circular Gaussian with per-entry variance
/// beta; each complex component carries half the variance.
struct ChannelSample {
  std::size_t bs = 0;
  std::size_t num_antennas = 0;
  std::size_t pilot_len = 0;
  std::size_t num_users = 0;

  std::vector<Complex> h;            // (i, t) x antennas
  std::vector<Complex> pilot_noise;  // antennas x pilot_len, column-major
  std::vector<Complex> data_noise;   // antennas
  std::vector<Complex> data_symbols; // (i, t)

  const Complex* channel(std::size_t user) const {
    return h.data() + user * num_antennas;
  }
};

/// Sample-mean estimates of the detection moments entering the capacity
/// bound SINR. Associative merge makes parallel accumulation order-free.
struct EmpiricalMoments {
  Complex mean_vh{0.0, 0.0};          // E{ v^H h_home }
  std::vector<double> second_moments; // E{ |v^H h_{i,t}|^2 }, per user
  double norm_sq = 0.0;               // E{ ||v||^2 }
  std::size_t sample_count = 0;

  void merge(const EmpiricalMoments& other);
};

/// Draws a fresh sample for the given BS. Reuses the buffers in `sample`
/// when already sized.
void draw_channel_sample(ChannelSample& sample,
                         const netgen::NetworkRealization& net,
                         const SystemConfig& cfg, std::size_t bs, Rng& rng);

/// Correlates the received pilot block with user (l, k)'s pilot sequence
/// under the canonical identity basis: y = Y_l psi_{l,k}.
std::vector<Complex> correlate_pilots(const ChannelSample& sample,
                                      const pilot::PilotAllocation& alloc,
                                      const SystemConfig& cfg, std::size_t l,
                                      std::size_t k);

/// MMSE channel estimate from the correlated received vector: a scalar
/// multiple of y whose per-antenna variance equals the closed-form gamma.
/// Throws std::invalid_argument if user (l, k) sends no pilot power.
std::vector<Complex> mmse_estimate(const std::vector<Complex>& y_corr,
                                   const pilot::PilotAllocation& alloc,
                                   const netgen::NetworkRealization& net,
                                   const SystemConfig& cfg, std::size_t l,
                                   std::size_t k);

struct SampleOptions {
  std::size_t n_samples = 200000;
  std::uint64_t seed = 1;
  /// 0 = use all hardware threads. Results are identical for any value.
  std::size_t workers = 0;
  /// Optional tau_p x tau_p unitary replacing the identity basis
  /// (column-major, size pilot_len^2); empty = canonical basis.
  std::vector<Complex> basis;
};

/// Accumulates detection moments for every user of cell `l` from shared
/// channel draws. Deterministic in the seed for any worker count.
std::vector<EmpiricalMoments> empirical_moments_cell(
    const pilot::PilotAllocation& alloc, const netgen::NetworkRealization& net,
    const SystemConfig& cfg, std::size_t l, const SampleOptions& opt);

/// Sample-average estimate of user (l, k)'s uplink SINR: expectations in the
/// capacity-bound ratio are replaced by separate sample means. Requires
/// n_samples >= 1000.
double empirical_sinr(const pilot::PilotAllocation& alloc,
                      const netgen::NetworkRealization& net,
                      const SystemConfig& cfg, std::size_t l, std::size_t k,
                      const SampleOptions& opt);

/// Empirical SINR for all users, sharing channel draws within each cell.
/// Returned values are indexed (l, k).
std::vector<double> empirical_sinr_all(const pilot::PilotAllocation& alloc,
                                       const netgen::NetworkRealization& net,
                                       const SystemConfig& cfg,
                                       const SampleOptions& opt);

/// Sample variance of the MMSE estimate's entries (averaged over antennas
/// and draws); converges to the closed-form gamma.
double empirical_estimate_variance(const pilot::PilotAllocation& alloc,
                                   const netgen::NetworkRealization& net,
                                   const SystemConfig& cfg, std::size_t l,
                                   std::size_t k, const SampleOptions& opt);

/// Builds the SINR ratio from accumulated moments.
double sinr_from_moments(const EmpiricalMoments& m,
                         const netgen::NetworkRealization& net,
                         const SystemConfig& cfg, std::size_t l,
                         std::size_t k);

}  // namespace pilotopt::mcoracle
