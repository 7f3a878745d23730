/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/mcoracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace pilotopt::mcoracle {

namespace {

// Fixed chunk count so the chunk -> seed mapping, and therefore every
// statistic, is identical for any worker count.
constexpr std::size_t kChunks = 32;

struct CellContext {
  std::size_t cells, users_per_cell, users, antennas, pilot_len, cell;
  std::vector<double> beta_n;    // beta / sigma^2 at this BS, per user
  std::vector<double> sqrt_half_beta;
  std::vector<double> psi_re;    // pilot sequences, (u, b)
  std::vector<double> psi_im;
  bool complex_basis = false;
  std::vector<double> row_sum;   // total pilot power per user
  std::vector<double> mmse_scale;  // per cell user, on normalized channels

  CellContext(const pilot::PilotAllocation& alloc,
              const netgen::NetworkRealization& net, const SystemConfig& cfg,
              std::size_t l, const std::vector<Complex>& basis) {
    cells = cfg.num_cells;
    users_per_cell = cfg.users_per_cell;
    users = cfg.num_users();
    antennas = cfg.num_antennas;
    pilot_len = cfg.pilot_len;
    cell = l;

    const double inv_noise = 1.0 / cfg.noise_power_w;
    beta_n.resize(users);
    sqrt_half_beta.resize(users);
    for (std::size_t u = 0; u < users; ++u) {
      beta_n[u] = net.beta[l * users + u] * inv_noise;
      sqrt_half_beta[u] = std::sqrt(0.5 * beta_n[u]);
    }

    row_sum.resize(users);
    psi_re.assign(users * pilot_len, 0.0);
    psi_im.assign(users * pilot_len, 0.0);
    if (!basis.empty() && basis.size() != pilot_len * pilot_len)
      throw std::invalid_argument("basis must be pilot_len x pilot_len");
    complex_basis = !basis.empty();
    for (std::size_t u = 0; u < users; ++u) {
      const auto r = alloc.row(u / users_per_cell, u % users_per_cell);
      row_sum[u] = std::accumulate(r.begin(), r.end(), 0.0);
      for (std::size_t b = 0; b < pilot_len; ++b) {
        if (r[b] < 0.0)
          throw std::invalid_argument("negative pilot power entry");
        const double s = std::sqrt(r[b]);
        if (!complex_basis) {
          psi_re[u * pilot_len + b] = s;
        } else {
          // psi = basis * sqrt(power row); basis is column-major.
          for (std::size_t rr = 0; rr < pilot_len; ++rr) {
            psi_re[u * pilot_len + rr] += basis[b * pilot_len + rr].real() * s;
            psi_im[u * pilot_len + rr] += basis[b * pilot_len + rr].imag() * s;
          }
        }
      }
    }

    mmse_scale.resize(users_per_cell);
    for (std::size_t k = 0; k < users_per_cell; ++k) {
      const std::size_t u = cell * users_per_cell + k;
      if (!(row_sum[u] > 0.0))
        throw std::invalid_argument(
            "user (" + std::to_string(cell) + "," + std::to_string(k) +
            ") sends no pilot power; estimation undefined");
      const auto uk = alloc.row(cell, k);
      double denom = row_sum[u];  // unit noise after normalization
      for (std::size_t v = 0; v < users; ++v) {
        const auto rv = alloc.row(v / users_per_cell, v % users_per_cell);
        denom += beta_n[v] * pilot::inner_product_sq(rv, uk);
      }
      mmse_scale[k] = beta_n[u] * row_sum[u] / denom;
    }
  }
};

struct MomentSums {
  double vh_re = 0.0, vh_im = 0.0;
  std::vector<double> second;
  double norm_sq = 0.0;
  std::size_t count = 0;
};

// Simulates `n` coherence blocks at one BS and accumulates the detection
// moments for each of its users.
void accumulate_chunk(const CellContext& ctx, std::size_t n,
                      std::uint64_t seed, std::vector<MomentSums>& out) {
  const std::size_t M = ctx.antennas;
  const std::size_t tp = ctx.pilot_len;
  const std::size_t users = ctx.users;
  const std::size_t K = ctx.users_per_cell;
  constexpr double kInvSqrt2 = 0.7071067811865475244;

  Rng rng(seed);
  std::vector<double> h_re(users * M), h_im(users * M);
  std::vector<double> y_re(tp * M), y_im(tp * M);  // received pilot block
  std::vector<double> c_re(M), c_im(M);            // correlated vector

  out.assign(K, MomentSums{});
  for (auto& m : out) m.second.assign(users, 0.0);

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t u = 0; u < users; ++u) {
      const double sc = ctx.sqrt_half_beta[u];
      double* hr = h_re.data() + u * M;
      double* hi = h_im.data() + u * M;
      for (std::size_t m = 0; m < M; ++m) {
        hr[m] = sc * rng.normal();
        hi[m] = sc * rng.normal();
      }
    }
    for (std::size_t i = 0; i < tp * M; ++i) {
      y_re[i] = kInvSqrt2 * rng.normal();
      y_im[i] = kInvSqrt2 * rng.normal();
    }
    // Y += sum_u h_u psi_u^H
    for (std::size_t u = 0; u < users; ++u) {
      const double* hr = h_re.data() + u * M;
      const double* hi = h_im.data() + u * M;
      for (std::size_t b = 0; b < tp; ++b) {
        const double wr = ctx.psi_re[u * tp + b];
        const double wi = -ctx.psi_im[u * tp + b];
        if (wr == 0.0 && wi == 0.0) continue;
        double* yr = y_re.data() + b * M;
        double* yi = y_im.data() + b * M;
        for (std::size_t m = 0; m < M; ++m) {
          yr[m] += hr[m] * wr - hi[m] * wi;
          yi[m] += hr[m] * wi + hi[m] * wr;
        }
      }
    }

    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t uk = ctx.cell * K + k;
      // y_corr = Y psi_uk
      std::fill(c_re.begin(), c_re.end(), 0.0);
      std::fill(c_im.begin(), c_im.end(), 0.0);
      for (std::size_t b = 0; b < tp; ++b) {
        const double pr = ctx.psi_re[uk * tp + b];
        const double pi = ctx.psi_im[uk * tp + b];
        if (pr == 0.0 && pi == 0.0) continue;
        const double* yr = y_re.data() + b * M;
        const double* yi = y_im.data() + b * M;
        for (std::size_t m = 0; m < M; ++m) {
          c_re[m] += yr[m] * pr - yi[m] * pi;
          c_im[m] += yr[m] * pi + yi[m] * pr;
        }
      }
      // v = mmse_scale * y_corr; the scale is folded in afterwards.
      const double c = ctx.mmse_scale[k];
      double nsq = 0.0;
      for (std::size_t m = 0; m < M; ++m)
        nsq += c_re[m] * c_re[m] + c_im[m] * c_im[m];
      out[k].norm_sq += c * c * nsq;

      for (std::size_t w = 0; w < users; ++w) {
        const double* hr = h_re.data() + w * M;
        const double* hi = h_im.data() + w * M;
        double dr = 0.0, di = 0.0;  // v^H h_w
        for (std::size_t m = 0; m < M; ++m) {
          dr += c_re[m] * hr[m] + c_im[m] * hi[m];
          di += c_re[m] * hi[m] - c_im[m] * hr[m];
        }
        dr *= c;
        di *= c;
        out[k].second[w] += dr * dr + di * di;
        if (w == uk) {
          out[k].vh_re += dr;
          out[k].vh_im += di;
        }
      }
      out[k].count += 1;
    }
  }
}

}  // namespace

void EmpiricalMoments::merge(const EmpiricalMoments& other) {
  if (other.sample_count == 0) return;
  if (sample_count == 0) {
    *this = other;
    return;
  }
  if (second_moments.size() != other.second_moments.size())
    throw std::invalid_argument("EmpiricalMoments::merge: shape mismatch");
  const double na = static_cast<double>(sample_count);
  const double nb = static_cast<double>(other.sample_count);
  const double inv = 1.0 / (na + nb);
  mean_vh = (mean_vh * na + other.mean_vh * nb) * inv;
  for (std::size_t i = 0; i < second_moments.size(); ++i)
    second_moments[i] =
        (second_moments[i] * na + other.second_moments[i] * nb) * inv;
  norm_sq = (norm_sq * na + other.norm_sq * nb) * inv;
  sample_count += other.sample_count;
}

void draw_channel_sample(ChannelSample& sample,
                         const netgen::NetworkRealization& net,
                         const SystemConfig& cfg, std::size_t bs, Rng& rng) {
  const std::size_t M = cfg.num_antennas;
  const std::size_t tp = cfg.pilot_len;
  const std::size_t users = cfg.num_users();
  sample.bs = bs;
  sample.num_antennas = M;
  sample.pilot_len = tp;
  sample.num_users = users;
  sample.h.resize(users * M);
  sample.pilot_noise.resize(M * tp);
  sample.data_noise.resize(M);
  sample.data_symbols.resize(users);

  for (std::size_t u = 0; u < users; ++u) {
    const double s = std::sqrt(0.5 * net.beta[bs * users + u]);
    for (std::size_t m = 0; m < M; ++m)
      sample.h[u * M + m] = {s * rng.normal(), s * rng.normal()};
  }
  const double sn = std::sqrt(0.5 * cfg.noise_power_w);
  for (auto& z : sample.pilot_noise) z = {sn * rng.normal(), sn * rng.normal()};
  for (auto& z : sample.data_noise) z = {sn * rng.normal(), sn * rng.normal()};
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  for (auto& z : sample.data_symbols)
    z = {kInvSqrt2 * rng.normal(), kInvSqrt2 * rng.normal()};
}

std::vector<Complex> correlate_pilots(const ChannelSample& sample,
                                      const pilot::PilotAllocation& alloc,
                                      const SystemConfig& cfg, std::size_t l,
                                      std::size_t k) {
  const std::size_t M = sample.num_antennas;
  const auto target = alloc.row(l, k);
  std::vector<Complex> y(M, Complex{0.0, 0.0});
  for (std::size_t u = 0; u < sample.num_users; ++u) {
    const auto r = alloc.row(u / cfg.users_per_cell, u % cfg.users_per_cell);
    double ip = 0.0;
    for (std::size_t b = 0; b < cfg.pilot_len; ++b)
      ip += std::sqrt(r[b] * target[b]);
    if (ip == 0.0) continue;
    const Complex* h = sample.channel(u);
    for (std::size_t m = 0; m < M; ++m) y[m] += h[m] * ip;
  }
  for (std::size_t b = 0; b < cfg.pilot_len; ++b) {
    const double s = std::sqrt(target[b]);
    if (s == 0.0) continue;
    const Complex* col = sample.pilot_noise.data() + b * M;
    for (std::size_t m = 0; m < M; ++m) y[m] += col[m] * s;
  }
  return y;
}

std::vector<Complex> mmse_estimate(const std::vector<Complex>& y_corr,
                                   const pilot::PilotAllocation& alloc,
                                   const netgen::NetworkRealization& net,
                                   const SystemConfig& cfg, std::size_t l,
                                   std::size_t k) {
  const std::size_t users = cfg.num_users();
  const auto target = alloc.row(l, k);
  const double sum = std::accumulate(target.begin(), target.end(), 0.0);
  if (!(sum > 0.0))
    throw std::invalid_argument("mmse_estimate: user sends no pilot power");
  double denom = cfg.noise_power_w * sum;
  for (std::size_t u = 0; u < users; ++u) {
    const auto r = alloc.row(u / cfg.users_per_cell, u % cfg.users_per_cell);
    denom += net.beta[l * users + u] * pilot::inner_product_sq(r, target);
  }
  const double c =
      net.beta[l * users + cfg.user_index(l, k)] * sum / denom;
  std::vector<Complex> est(y_corr.size());
  for (std::size_t m = 0; m < y_corr.size(); ++m) est[m] = c * y_corr[m];
  return est;
}

std::vector<EmpiricalMoments> empirical_moments_cell(
    const pilot::PilotAllocation& alloc, const netgen::NetworkRealization& net,
    const SystemConfig& cfg, std::size_t l, const SampleOptions& opt) {
  if (opt.n_samples < 1)
    throw std::invalid_argument("empirical_moments_cell: need samples");
  const CellContext ctx(alloc, net, cfg, l, opt.basis);

  const std::size_t chunks = std::min<std::size_t>(kChunks, opt.n_samples);
  const std::size_t base = opt.n_samples / chunks;
  const std::size_t extra = opt.n_samples % chunks;

  std::size_t workers = opt.workers ? opt.workers
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, chunks);

  std::vector<std::vector<MomentSums>> per_chunk(chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) break;
      const std::size_t n = base + (c < extra ? 1 : 0);
      accumulate_chunk(ctx, n, derive_seed(opt.seed, c), per_chunk[c]);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<EmpiricalMoments> result(cfg.users_per_cell);
  for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
    EmpiricalMoments total;
    for (std::size_t c = 0; c < chunks; ++c) {
      const MomentSums& ms = per_chunk[c][k];
      if (ms.count == 0) continue;
      EmpiricalMoments part;
      const double inv = 1.0 / static_cast<double>(ms.count);
      part.mean_vh = Complex{ms.vh_re * inv, ms.vh_im * inv};
      part.second_moments.resize(ms.second.size());
      for (std::size_t u = 0; u < ms.second.size(); ++u)
        part.second_moments[u] = ms.second[u] * inv;
      part.norm_sq = ms.norm_sq * inv;
      part.sample_count = ms.count;
      total.merge(part);
    }
    result[k] = std::move(total);
  }
  return result;
}

double sinr_from_moments(const EmpiricalMoments& m,
                         const netgen::NetworkRealization& net,
                         const SystemConfig& cfg, std::size_t l,
                         std::size_t k) {
  (void)net;
  if (m.sample_count == 0)
    throw std::invalid_argument("sinr_from_moments: empty moments");
  const double p_target = cfg.data_power(l, k);
  const double signal = p_target * std::norm(m.mean_vh);
  double interference = 0.0;
  for (std::size_t u = 0; u < m.second_moments.size(); ++u)
    interference += cfg.data_power_w[u] * m.second_moments[u];
  // Moments are accumulated on noise-normalized channels, so the noise
  // variance multiplying E{||v||^2} is exactly one.
  const double denom = interference - signal + m.norm_sq;
  return signal / denom;
}

double empirical_sinr(const pilot::PilotAllocation& alloc,
                      const netgen::NetworkRealization& net,
                      const SystemConfig& cfg, std::size_t l, std::size_t k,
                      const SampleOptions& opt) {
  if (opt.n_samples < 1000)
    throw std::invalid_argument("empirical_sinr: need at least 1000 samples");
  const auto moments = empirical_moments_cell(alloc, net, cfg, l, opt);
  return sinr_from_moments(moments.at(k), net, cfg, l, k);
}

std::vector<double> empirical_sinr_all(const pilot::PilotAllocation& alloc,
                                       const netgen::NetworkRealization& net,
                                       const SystemConfig& cfg,
                                       const SampleOptions& opt) {
  if (opt.n_samples < 1000)
    throw std::invalid_argument(
        "empirical_sinr_all: need at least 1000 samples");
  std::vector<double> out(cfg.num_users());
  for (std::size_t l = 0; l < cfg.num_cells; ++l) {
    SampleOptions cell_opt = opt;
    cell_opt.seed = derive_seed(opt.seed, 0xCE11ULL + l);
    const auto moments = empirical_moments_cell(alloc, net, cfg, l, cell_opt);
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k)
      out[cfg.user_index(l, k)] = sinr_from_moments(moments[k], net, cfg, l, k);
  }
  return out;
}

double empirical_estimate_variance(const pilot::PilotAllocation& alloc,
                                   const netgen::NetworkRealization& net,
                                   const SystemConfig& cfg, std::size_t l,
                                   std::size_t k, const SampleOptions& opt) {
  const auto moments = empirical_moments_cell(alloc, net, cfg, l, opt);
  // E{||v||^2} / M on normalized channels, mapped back to a channel gain.
  return moments.at(k).norm_sq /
         static_cast<double>(cfg.num_antennas) * cfg.noise_power_w;
}

}  // namespace pilotopt::mcoracle
