/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pilotopt {

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double SystemConfig::max_pilot_power_cap() const {
  return *std::max_element(pilot_power_max_w.begin(), pilot_power_max_w.end());
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("SystemConfig: " + msg);
  };
  if (num_cells < 1) fail("need at least one cell");
  if (users_per_cell < 1) fail("need at least one user per cell");
  if (num_antennas < 1) fail("need at least one antenna");
  if (pilot_len < 1) fail("pilot length must be >= 1");
  if (pilot_len > coherence_len) fail("pilot length exceeds coherence block");
  if (!(noise_power_w > 0.0)) fail("noise power must be positive");
  if (pilot_power_max_w.size() != num_users())
    fail("pilot_power_max_w has wrong size");
  if (data_power_w.size() != num_users()) fail("data_power_w has wrong size");
  for (double p : pilot_power_max_w)
    if (!(p > 0.0)) fail("pilot power caps must be positive");
  for (double p : data_power_w)
    if (!(p > 0.0)) fail("data powers must be positive");
  if (!(area_side_km > 0.0)) fail("area side must be positive");
  if (!(min_distance_km >= 0.0)) fail("min distance must be nonnegative");
  if (!(shadow_std_db >= 0.0)) fail("shadow std must be nonnegative");
}

SystemConfig SystemConfig::with_uniform_powers(
    std::size_t cells, std::size_t users_per_cell, std::size_t antennas,
    std::size_t pilot_len, std::size_t coherence_len, double noise_power_w,
    double pilot_power_max_w, double data_power_w) {
  SystemConfig cfg;
  cfg.num_cells = cells;
  cfg.users_per_cell = users_per_cell;
  cfg.num_antennas = antennas;
  cfg.pilot_len = pilot_len;
  cfg.coherence_len = coherence_len;
  cfg.noise_power_w = noise_power_w;
  cfg.pilot_power_max_w.assign(cfg.num_users(), pilot_power_max_w);
  cfg.data_power_w.assign(cfg.num_users(), data_power_w);
  return cfg;
}

}  // namespace pilotopt
