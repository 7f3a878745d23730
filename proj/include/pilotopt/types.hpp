/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <vector>

namespace pilotopt {

/// Global system constants for a multi-cell uplink scenario.
///
/// All powers are stored in watts on a linear scale; dB/dBm conversions
/// happen only at the config boundary (see bench::CampaignConfig).
struct SystemConfig {
  std::size_t num_cells = 4;        // L
  std::size_t users_per_cell = 2;   // K
  std::size_t num_antennas = 300;   // M
  std::size_t pilot_len = 2;        // tau_p, symbols
  std::size_t coherence_len = 200;  // tau_c, symbols

  double noise_power_w = 2.511886431509582e-13;  // -96 dBm

  /// Per-user cap on the *average* pilot power, indexed (cell, user).
  std::vector<double> pilot_power_max_w;
  /// Per-user uplink data power, indexed (cell, user).
  std::vector<double> data_power_w;

  double area_side_km = 1.0;
  double min_distance_km = 0.035;
  double shadow_std_db = 7.0;

  std::size_t num_users() const { return num_cells * users_per_cell; }
  std::size_t user_index(std::size_t cell, std::size_t user) const {
    return cell * users_per_cell + user;
  }
  double pilot_power_max(std::size_t cell, std::size_t user) const {
    return pilot_power_max_w[user_index(cell, user)];
  }
  double data_power(std::size_t cell, std::size_t user) const {
    return data_power_w[user_index(cell, user)];
  }
  double max_pilot_power_cap() const;

  /// Throws std::invalid_argument if any structural invariant is violated
  /// (counts >= 1, 1 <= tau_p <= tau_c, all powers > 0, power vectors sized
  /// num_cells * users_per_cell).
  void validate() const;

  /// Convenience constructor with one power level shared by all users.
  static SystemConfig with_uniform_powers(std::size_t cells,
                                          std::size_t users_per_cell,
                                          std::size_t antennas,
                                          std::size_t pilot_len,
                                          std::size_t coherence_len,
                                          double noise_power_w,
                                          double pilot_power_max_w,
                                          double data_power_w);
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);

}  // namespace pilotopt
