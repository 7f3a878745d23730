/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/pilot.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pilotopt::pilot {

double PilotAllocation::row_sum(std::size_t cell, std::size_t user) const {
  const auto r = row(cell, user);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

double inner_product_sq(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("inner_product_sq: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0 || b[i] < 0.0)
      throw std::invalid_argument("inner_product_sq: negative power entry");
    s += std::sqrt(a[i] * b[i]);
  }
  return s * s;
}

PilotAllocation from_assignment(const PilotAssignment& assign,
                                const SystemConfig& cfg) {
  if (assign.num_cells != cfg.num_cells ||
      assign.users_per_cell != cfg.users_per_cell ||
      assign.pilot_len != cfg.pilot_len)
    throw std::invalid_argument("from_assignment: shape mismatch with config");
  PilotAllocation alloc = PilotAllocation::zeros(cfg);
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      const std::size_t b = assign.pilot_of(l, k);
      if (b >= cfg.pilot_len)
        throw std::invalid_argument("from_assignment: pilot index " +
                                    std::to_string(b) + " out of range");
      alloc.at(l, k, b) = assign.power_of(l, k);
    }
  return alloc;
}

std::vector<PowerViolation> validate(const PilotAllocation& alloc,
                                     const SystemConfig& cfg) {
  constexpr double kRelTol = 1e-9;
  std::vector<PowerViolation> out;
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      double sum = 0.0;
      for (std::size_t b = 0; b < cfg.pilot_len; ++b) {
        const double p = alloc.at(l, k, b);
        if (p < 0.0)
          out.push_back({PowerViolation::Kind::kNegativeEntry, l, k, p});
        else
          sum += p;
      }
      const double cap = cfg.pilot_power_max(l, k);
      const double avg = sum / static_cast<double>(cfg.pilot_len);
      if (avg > cap * (1.0 + kRelTol))
        out.push_back(
            {PowerViolation::Kind::kBudgetExceeded, l, k, avg - cap});
    }
  return out;
}

}  // namespace pilotopt::pilot
