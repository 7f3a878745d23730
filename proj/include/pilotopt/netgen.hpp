/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <vector>

#include "pilotopt/types.hpp"

namespace pilotopt::netgen {

/// One random drop of user positions, wrap-around distances, shadow fading
/// and the resulting large-scale fading coefficients. Immutable after
/// construction and safe to share across threads.
struct NetworkRealization {
  std::size_t num_cells = 0;
  std::size_t users_per_cell = 0;
  double area_side_km = 0.0;

  std::vector<double> bs_x_km;  // per cell
  std::vector<double> bs_y_km;

  std::vector<double> user_x_km;  // per (cell, user)
  std::vector<double> user_y_km;

  /// Minimum-image distance from user (i, t) to BS l, indexed (l, i, t).
  std::vector<double> distance_km;
  /// Shadow fading in dB, indexed (l, i, t).
  std::vector<double> shadow_db;
  /// Large-scale channel power gain (linear), indexed (l, i, t).
  std::vector<double> beta;

  std::size_t num_users() const { return num_cells * users_per_cell; }
  std::size_t link_index(std::size_t bs, std::size_t cell,
                         std::size_t user) const {
    return (bs * num_cells + cell) * users_per_cell + user;
  }
  double beta_at(std::size_t bs, std::size_t cell, std::size_t user) const {
    return beta[link_index(bs, cell, user)];
  }
  double distance_at(std::size_t bs, std::size_t cell,
                     std::size_t user) const {
    return distance_km[link_index(bs, cell, user)];
  }
};

/// Distance-based channel gain in dB: -148.1 - 37.6 * log10(d_km).
/// Throws std::invalid_argument for nonpositive distances.
double pathloss_db(double d_km);

/// Torus (minimum-image) distance between two points on a square of the
/// given side length; equivalent to the minimum over the 9 translated
/// copies of the second point.
double wrap_distance_km(double ax_km, double ay_km, double bx_km,
                        double by_km, double side_km);

/// Draws a network realization: BSs on a sqrt(L) x sqrt(L) grid of square
/// cells, users uniform in their home cell outside the BS exclusion disc,
/// lognormal shadowing redrawn per user until the home BS has the largest
/// large-scale fading. Same seed reproduces the realization bit for bit.
///
/// Throws std::invalid_argument on invalid configs (including non-square L)
/// and std::runtime_error if rejection resampling exceeds its cap.
NetworkRealization generate_network(const SystemConfig& cfg,
                                    std::uint64_t seed);

}  // namespace pilotopt::netgen
