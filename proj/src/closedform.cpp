/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pilotopt/pilot.hpp"

namespace pilotopt::closedform {

namespace {

// Shared per-allocation state, everything pre-divided by the noise power so
// magnitudes stay near one. The SINR is invariant under jointly scaling all
// betas and the noise power, so this normalization is exact.
struct EvalContext {
  std::size_t cells, users_per_cell, users, pilot_len;
  double antennas;
  std::vector<double> beta_n;     // beta / sigma^2, (l, i, t) flattened
  std::vector<double> overlap;    // squared pilot cross-correlation, (u, u')
  std::vector<double> row_sum;    // total pilot power per user
  std::vector<double> received;   // sum_jt p_jt beta_n + 1, per BS
  std::vector<double> data_p;     // per user

  EvalContext(const pilot::PilotAllocation& alloc,
              const netgen::NetworkRealization& net, const SystemConfig& cfg) {
    cells = cfg.num_cells;
    users_per_cell = cfg.users_per_cell;
    users = cfg.num_users();
    pilot_len = cfg.pilot_len;
    antennas = static_cast<double>(cfg.num_antennas);
    if (alloc.num_cells != cells || alloc.users_per_cell != users_per_cell ||
        alloc.pilot_len != pilot_len)
      throw std::invalid_argument("allocation shape mismatch with config");
    if (net.num_cells != cells || net.users_per_cell != users_per_cell)
      throw std::invalid_argument("network shape mismatch with config");

    const double inv_noise = 1.0 / cfg.noise_power_w;
    beta_n.resize(net.beta.size());
    for (std::size_t i = 0; i < net.beta.size(); ++i)
      beta_n[i] = net.beta[i] * inv_noise;

    data_p = cfg.data_power_w;
    row_sum.resize(users);
    for (std::size_t u = 0; u < users; ++u)
      row_sum[u] =
          alloc.row_sum(u / users_per_cell, u % users_per_cell);

    overlap.assign(users * users, 0.0);
    for (std::size_t u = 0; u < users; ++u) {
      const auto a = alloc.row(u / users_per_cell, u % users_per_cell);
      for (std::size_t v = u; v < users; ++v) {
        const auto b = alloc.row(v / users_per_cell, v % users_per_cell);
        const double q = pilot::inner_product_sq(a, b);
        overlap[u * users + v] = q;
        overlap[v * users + u] = q;
      }
    }

    received.assign(cells, 1.0);
    for (std::size_t l = 0; l < cells; ++l)
      for (std::size_t u = 0; u < users; ++u)
        received[l] += data_p[u] * beta_n[l * users + u];
  }

  double beta_at(std::size_t bs, std::size_t u) const {
    return beta_n[bs * users + u];
  }

  // Denominator of the estimate-variance expression: total received pilot
  // energy correlated onto user u's sequence, plus the correlated noise.
  double pilot_denominator(std::size_t bs, std::size_t u) const {
    double s = row_sum[u];  // sigma^2 term with sigma^2 = 1 after scaling
    for (std::size_t v = 0; v < users; ++v)
      s += beta_at(bs, v) * overlap[u * users + v];
    return s;
  }

  double gamma(std::size_t bs, std::size_t u) const {
    const double b = beta_at(bs, u);
    return b * b * row_sum[u] * row_sum[u] / pilot_denominator(bs, u);
  }

  // SINR with the numerator's (sum_b p)^2 factor supplied by the caller;
  // passing row_sum[u]^2 yields the exact closed form.
  double sinr_with_numerator_power(std::size_t l, std::size_t u,
                                   double num_power_sq) const {
    const double beta_home = beta_at(l, u);
    const double numerator =
        antennas * beta_home * beta_home * data_p[u] * num_power_sq;
    double coherent = 0.0;
    for (std::size_t v = 0; v < users; ++v) {
      if (v == u) continue;
      const double b = beta_at(l, v);
      coherent += data_p[v] * b * b * overlap[u * users + v];
    }
    const double denom =
        pilot_denominator(l, u) * received[l] + antennas * coherent;
    return numerator / denom;
  }

  void require_pilot_power(std::size_t l, std::size_t k) const {
    if (!(row_sum[l * users_per_cell + k] > 0.0))
      throw std::invalid_argument(
          "user (" + std::to_string(l) + "," + std::to_string(k) +
          ") sends no pilot power; estimation undefined");
  }
};

}  // namespace

double estimate_variance(const pilot::PilotAllocation& alloc,
                         const netgen::NetworkRealization& net,
                         const SystemConfig& cfg, std::size_t l,
                         std::size_t k) {
  const EvalContext ctx(alloc, net, cfg);
  ctx.require_pilot_power(l, k);
  // gamma is a channel gain: undo the noise normalization.
  return ctx.gamma(l, cfg.user_index(l, k)) * cfg.noise_power_w;
}

double sinr_closed_form(const pilot::PilotAllocation& alloc,
                        const netgen::NetworkRealization& net,
                        const SystemConfig& cfg, std::size_t l,
                        std::size_t k) {
  const EvalContext ctx(alloc, net, cfg);
  ctx.require_pilot_power(l, k);
  const std::size_t u = cfg.user_index(l, k);
  return ctx.sinr_with_numerator_power(l, u, ctx.row_sum[u] * ctx.row_sum[u]);
}

SinrReport se(const pilot::PilotAllocation& alloc,
              const netgen::NetworkRealization& net, const SystemConfig& cfg) {
  const EvalContext ctx(alloc, net, cfg);
  SinrReport rep;
  rep.num_cells = cfg.num_cells;
  rep.users_per_cell = cfg.users_per_cell;
  rep.prelog = 1.0 - static_cast<double>(cfg.pilot_len) /
                         static_cast<double>(cfg.coherence_len);
  rep.gamma.resize(ctx.users);
  rep.sinr.resize(ctx.users);
  rep.se.resize(ctx.users);
  rep.min_se = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < ctx.cells; ++l)
    for (std::size_t k = 0; k < ctx.users_per_cell; ++k) {
      ctx.require_pilot_power(l, k);
      const std::size_t u = cfg.user_index(l, k);
      rep.gamma[u] = ctx.gamma(l, u) * cfg.noise_power_w;
      rep.sinr[u] =
          ctx.sinr_with_numerator_power(l, u, ctx.row_sum[u] * ctx.row_sum[u]);
      rep.se[u] = rep.prelog * std::log2(1.0 + rep.sinr[u]);
      rep.min_se = std::min(rep.min_se, rep.se[u]);
    }
  return rep;
}

double sinr_approx(const pilot::PilotAllocation& alloc,
                   const netgen::NetworkRealization& net,
                   const SystemConfig& cfg, const Weights& w, std::size_t l,
                   std::size_t k) {
  if (w.num_cells != cfg.num_cells ||
      w.users_per_cell != cfg.users_per_cell || w.pilot_len != cfg.pilot_len)
    throw std::invalid_argument("sinr_approx: weight shape mismatch");
  const EvalContext ctx(alloc, net, cfg);
  ctx.require_pilot_power(l, k);
  const std::size_t u = cfg.user_index(l, k);

  // Monomial bound on sum_b p: prod_b (p_b / alpha_b)^alpha_b, squared.
  double log_bound = 0.0;
  for (std::size_t b = 0; b < cfg.pilot_len; ++b) {
    const double a = w.at(l, k, b);
    if (a < 0.0) throw std::invalid_argument("sinr_approx: negative weight");
    if (a == 0.0) continue;  // 0^0 = 1 convention
    const double p = alloc.at(l, k, b);
    if (!(p > 0.0))
      throw std::invalid_argument(
          "sinr_approx: positive weight on a zero-power basis entry");
    log_bound += a * (std::log(p) - std::log(a));
  }
  const double bound = std::exp(log_bound);
  return ctx.sinr_with_numerator_power(l, u, bound * bound);
}

}  // namespace pilotopt::closedform
