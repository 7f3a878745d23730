/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/netgen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pilotopt/rng.hpp"

namespace pilotopt::netgen {

namespace {

constexpr int kMaxPositionDraws = 1000;
constexpr int kMaxShadowDraws = 1000;

std::size_t integer_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::lround(std::sqrt(double(n))));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace

double pathloss_db(double d_km) {
  if (!(d_km > 0.0))
    throw std::invalid_argument("pathloss_db: distance must be positive, got " +
                                std::to_string(d_km));
  return -148.1 - 37.6 * std::log10(d_km);
}

double wrap_distance_km(double ax_km, double ay_km, double bx_km,
                        double by_km, double side_km) {
  double dx = std::fabs(ax_km - bx_km);
  double dy = std::fabs(ay_km - by_km);
  dx = std::min(dx, side_km - dx);
  dy = std::min(dy, side_km - dy);
  return std::hypot(dx, dy);
}

NetworkRealization generate_network(const SystemConfig& cfg,
                                    std::uint64_t seed) {
  cfg.validate();
  const std::size_t cells = cfg.num_cells;
  const std::size_t grid = integer_sqrt(cells);
  if (grid * grid != cells)
    throw std::invalid_argument(
        "generate_network: cell count must be a perfect square, got " +
        std::to_string(cells));

  const double side = cfg.area_side_km;
  const double cell_side = side / static_cast<double>(grid);

  NetworkRealization net;
  net.num_cells = cells;
  net.users_per_cell = cfg.users_per_cell;
  net.area_side_km = side;
  net.bs_x_km.resize(cells);
  net.bs_y_km.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    net.bs_x_km[c] = (static_cast<double>(c % grid) + 0.5) * cell_side;
    net.bs_y_km[c] = (static_cast<double>(c / grid) + 0.5) * cell_side;
  }

  const std::size_t users = cfg.num_users();
  net.user_x_km.resize(users);
  net.user_y_km.resize(users);
  net.distance_km.resize(cells * users);
  net.shadow_db.resize(cells * users);
  net.beta.resize(cells * users);

  Rng rng(seed);

  // Uniform position in the home cell square, outside the exclusion disc.
  for (std::size_t i = 0; i < cells; ++i) {
    const double x0 = net.bs_x_km[i] - 0.5 * cell_side;
    const double y0 = net.bs_y_km[i] - 0.5 * cell_side;
    for (std::size_t t = 0; t < cfg.users_per_cell; ++t) {
      const std::size_t u = cfg.user_index(i, t);
      int tries = 0;
      for (;;) {
        const double x = x0 + rng.uniform() * cell_side;
        const double y = y0 + rng.uniform() * cell_side;
        if (std::hypot(x - net.bs_x_km[i], y - net.bs_y_km[i]) >=
            cfg.min_distance_km) {
          net.user_x_km[u] = x;
          net.user_y_km[u] = y;
          break;
        }
        if (++tries >= kMaxPositionDraws)
          throw std::runtime_error(
              "generate_network: could not place a user outside the "
              "exclusion disc; cell smaller than the exclusion radius?");
      }
    }
  }

  for (std::size_t l = 0; l < cells; ++l)
    for (std::size_t i = 0; i < cells; ++i)
      for (std::size_t t = 0; t < cfg.users_per_cell; ++t) {
        const std::size_t u = cfg.user_index(i, t);
        net.distance_km[net.link_index(l, i, t)] =
            wrap_distance_km(net.user_x_km[u], net.user_y_km[u],
                             net.bs_x_km[l], net.bs_y_km[l], side);
      }

  // Shadow fading, redrawn per user until the home BS has the largest
  // large-scale fading.
  for (std::size_t i = 0; i < cells; ++i)
    for (std::size_t t = 0; t < cfg.users_per_cell; ++t) {
      int tries = 0;
      for (;;) {
        for (std::size_t l = 0; l < cells; ++l) {
          const std::size_t idx = net.link_index(l, i, t);
          const double z = rng.normal(0.0, cfg.shadow_std_db);
          net.shadow_db[idx] = z;
          net.beta[idx] =
              db_to_linear(pathloss_db(net.distance_km[idx]) + z);
        }
        const double home = net.beta_at(i, i, t);
        bool home_strongest = true;
        for (std::size_t l = 0; l < cells; ++l)
          if (net.beta_at(l, i, t) > home) {
            home_strongest = false;
            break;
          }
        if (home_strongest) break;
        if (++tries >= kMaxShadowDraws)
          throw std::runtime_error(
              "generate_network: home-BS-strongest rule unreachable after " +
              std::to_string(kMaxShadowDraws) + " shadow redraws");
      }
    }

  return net;
}

}  // namespace pilotopt::netgen
