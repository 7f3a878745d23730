/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pilotopt Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "pilotopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pilotopt::gp {

namespace {

constexpr double kKktTol = 1e-6;
constexpr double kGradTol = 1e-8;
constexpr std::size_t kMaxNewtonPerRung = 80;
constexpr std::size_t kMaxProbes = 400;

double checked_log(double v, const char* what) {
  if (!(v > 0.0))
    throw std::invalid_argument(std::string(what) +
                                " must be positive, got " + std::to_string(v));
  return std::log(v);
}

}  // namespace

void Monomial::mul_power(VarId v, double e) {
  if (e == 0.0) return;
  auto it = std::lower_bound(
      exponents.begin(), exponents.end(), v,
      [](const auto& p, VarId id) { return p.first < id; });
  if (it != exponents.end() && it->first == v) {
    it->second += e;
    if (it->second == 0.0) exponents.erase(it);
  } else {
    exponents.insert(it, {v, e});
  }
}

double Monomial::exponent_of(VarId v) const {
  for (const auto& [id, e] : exponents)
    if (id == v) return e;
  return 0.0;
}

double Monomial::eval(std::span<const double> x) const {
  double log_val = std::log(coeff);
  for (const auto& [id, e] : exponents)
    log_val += e * checked_log(x[id], "monomial argument");
  return std::exp(log_val);
}

double Posynomial::eval(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.eval(x);
  return s;
}

Monomial amgm_lower_bound(const Posynomial& p, std::span<const double> anchor) {
  if (p.terms.empty())
    throw std::invalid_argument("amgm_lower_bound: empty posynomial");
  std::vector<double> log_vals(p.terms.size());
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const Monomial& t = p.terms[i];
    if (!(t.coeff > 0.0))
      throw std::invalid_argument("amgm_lower_bound: nonpositive coefficient");
    double lv = std::log(t.coeff);
    for (const auto& [id, e] : t.exponents) {
      if (id >= anchor.size() || !(anchor[id] > 0.0))
        throw std::invalid_argument(
            "amgm_lower_bound: anchor must be strictly positive on every "
            "variable the posynomial uses");
      lv += e * std::log(anchor[id]);
    }
    log_vals[i] = lv;
  }
  // Weights via a max-shifted softmax so extreme anchors stay finite.
  const double m = *std::max_element(log_vals.begin(), log_vals.end());
  double z = 0.0;
  for (double lv : log_vals) z += std::exp(lv - m);

  Monomial bound;
  double log_coeff = 0.0;
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const double alpha = std::exp(log_vals[i] - m) / z;
    if (alpha == 0.0) continue;  // vanished term: 0^0 = 1 convention
    log_coeff += alpha * (std::log(p.terms[i].coeff) - std::log(alpha));
    for (const auto& [id, e] : p.terms[i].exponents)
      bound.mul_power(id, alpha * e);
  }
  bound.coeff = std::exp(log_coeff);
  return bound;
}

// ---------------------------------------------------------------------------
// Solver internals: constraints compiled to log-domain form over the reduced
// variable set (every variable except the objective).

namespace {

struct LogTerm {
  double base = 0.0;     // log coefficient
  double obj_exp = 0.0;  // exponent on the objective variable
  std::vector<std::pair<std::uint32_t, double>> a;  // reduced var exponents
};

struct LogConstraint {
  std::vector<LogTerm> terms;
  double max_obj_exp = 0.0;
};

struct Compiled {
  std::size_t n = 0;           // reduced variable count
  std::size_t num_posyn = 0;   // leading entries of `cons` are real constraints
  std::size_t total_terms = 0;
  std::vector<LogConstraint> cons;  // posynomials first, then box bounds
  std::vector<double> box_lo, box_hi;  // log-domain box on reduced vars
};

struct EvalScratch {
  std::vector<double> z;       // term logs, flat across constraints
  std::vector<double> g;       // per-constraint LSE values
  std::vector<double> zmax;    // per-constraint max term log
  std::vector<double> grad_j;  // gradient of one constraint
};

std::size_t reduced_index(VarId v, VarId obj) {
  return v < obj ? v : static_cast<std::size_t>(v) - 1;
}

Compiled compile(const GpProblem& prob) {
  if (prob.num_vars == 0) throw std::invalid_argument("GP has no variables");
  if (prob.objective_var >= prob.num_vars)
    throw std::invalid_argument("objective variable out of range");
  if (prob.lower.size() != prob.num_vars || prob.upper.size() != prob.num_vars)
    throw std::invalid_argument("GP bounds must cover every variable");
  for (std::size_t v = 0; v < prob.num_vars; ++v) {
    if (!(prob.lower[v] > 0.0) || !(prob.upper[v] >= prob.lower[v]))
      throw std::invalid_argument("GP bounds must satisfy 0 < lower <= upper");
  }

  Compiled c;
  c.n = prob.num_vars - 1;
  c.num_posyn = prob.constraints.size();
  c.cons.reserve(c.num_posyn + 2 * c.n);
  for (const Posynomial& p : prob.constraints) {
    if (p.terms.empty())
      throw std::invalid_argument("empty posynomial constraint");
    LogConstraint lc;
    lc.terms.reserve(p.terms.size());
    for (const Monomial& m : p.terms) {
      LogTerm t;
      t.base = checked_log(m.coeff, "posynomial coefficient");
      for (const auto& [id, e] : m.exponents) {
        if (!std::isfinite(e))
          throw std::invalid_argument("non-finite exponent");
        if (id >= prob.num_vars)
          throw std::invalid_argument("constraint references unknown variable");
        if (id == prob.objective_var) {
          if (e < 0.0)
            throw std::invalid_argument(
                "objective variable must have nonnegative exponents "
                "(epigraph form)");
          t.obj_exp += e;
        } else {
          t.a.emplace_back(
              static_cast<std::uint32_t>(reduced_index(id, prob.objective_var)),
              e);
        }
      }
      lc.max_obj_exp = std::max(lc.max_obj_exp, t.obj_exp);
      lc.terms.push_back(std::move(t));
    }
    c.cons.push_back(std::move(lc));
  }

  c.box_lo.resize(c.n);
  c.box_hi.resize(c.n);
  for (std::size_t v = 0, r = 0; v < prob.num_vars; ++v) {
    if (v == prob.objective_var) continue;
    c.box_lo[r] = std::log(prob.lower[v]);
    c.box_hi[r] = std::log(prob.upper[v]);
    // x_v / hi <= 1 and lo / x_v <= 1 as single-term log constraints.
    LogConstraint up;
    up.terms.push_back({-c.box_hi[r], 0.0, {{std::uint32_t(r), 1.0}}});
    c.cons.push_back(std::move(up));
    LogConstraint dn;
    dn.terms.push_back({c.box_lo[r], 0.0, {{std::uint32_t(r), -1.0}}});
    c.cons.push_back(std::move(dn));
    ++r;
  }
  for (const auto& lc : c.cons) c.total_terms += lc.terms.size();
  return c;
}

// Log of one compiled constraint at (log-objective t, reduced point y).
double constraint_log(const LogConstraint& lc, double t,
                      std::span<const double> y, std::vector<double>& z) {
  z.resize(lc.terms.size());
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lc.terms.size(); ++i) {
    const LogTerm& tm = lc.terms[i];
    double v = tm.base + tm.obj_exp * t;
    for (const auto& [r, e] : tm.a) v += e * y[r];
    z[i] = v;
    zmax = std::max(zmax, v);
  }
  if (lc.terms.size() == 1) return z[0];
  double s = 0.0;
  for (double v : z) s += std::exp(v - zmax);
  return zmax + std::log(s);
}

double exact_max(const Compiled& c, double t, std::span<const double> y,
                 EvalScratch& scratch) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& lc : c.cons)
    m = std::max(m, constraint_log(lc, t, y, scratch.z));
  return m;
}

double max_posyn_residual(const Compiled& c, double t,
                          std::span<const double> y, EvalScratch& scratch) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.num_posyn; ++j)
    m = std::max(m, constraint_log(c.cons[j], t, y, scratch.z));
  return m;
}

// Certified objective increase from a feasible point: every constraint
// shifts by at most max_obj_exp per unit of log objective, so the same
// point stays feasible for that far.
double certified_advance(const Compiled& c, double t, std::span<const double> y,
                         EvalScratch& scratch) {
  double adv = std::numeric_limits<double>::infinity();
  for (const auto& lc : c.cons) {
    const double g = constraint_log(lc, t, y, scratch.z);
    if (g > 0.0) return 0.0;
    if (lc.max_obj_exp > 0.0) adv = std::min(adv, -g / lc.max_obj_exp);
  }
  return std::isfinite(adv) ? adv : 0.0;
}

// Smoothed maximum F_mu = mu * log sum_j exp(g_j / mu) with gradient and
// Hessian in the reduced variables. Also reports the exact maximum. Term
// logs are computed once into a flat buffer and reused for the derivatives.
double eval_softmax(const Compiled& c, double t, std::span<const double> y,
                    double mu, bool want_derivs, std::vector<double>& grad,
                    std::vector<double>& hess, double& out_exact_max,
                    EvalScratch& scratch) {
  const std::size_t n = c.n;
  const std::size_t J = c.cons.size();
  scratch.g.resize(J);
  scratch.z.resize(c.total_terms);
  scratch.zmax.resize(J);

  double gmax = -std::numeric_limits<double>::infinity();
  std::size_t off = 0;
  for (std::size_t j = 0; j < J; ++j) {
    const LogConstraint& lc = c.cons[j];
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lc.terms.size(); ++i) {
      const LogTerm& tm = lc.terms[i];
      double v = tm.base + tm.obj_exp * t;
      for (const auto& [r, e] : tm.a) v += e * y[r];
      scratch.z[off + i] = v;
      zmax = std::max(zmax, v);
    }
    double g = zmax;
    if (lc.terms.size() > 1) {
      double s = 0.0;
      for (std::size_t i = 0; i < lc.terms.size(); ++i) {
        const double d = scratch.z[off + i] - zmax;
        if (d > -40.0) s += std::exp(d);
      }
      g = zmax + std::log(s);
    }
    scratch.g[j] = g;
    scratch.zmax[j] = zmax;
    gmax = std::max(gmax, g);
    off += lc.terms.size();
  }
  out_exact_max = gmax;

  double S = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double d = (scratch.g[j] - gmax) / mu;
    if (d > -700.0) S += std::exp(d);
  }
  const double F = gmax + mu * std::log(S);
  if (!want_derivs) return F;

  grad.assign(n, 0.0);
  hess.assign(n * n, 0.0);
  scratch.grad_j.assign(n, 0.0);

  off = 0;
  for (std::size_t j = 0; j < J; ++j) {
    const LogConstraint& lc = c.cons[j];
    const std::size_t terms = lc.terms.size();
    const double W = std::exp((scratch.g[j] - gmax) / mu) / S;
    // Constraints far from the active set contribute nothing measurable to
    // either derivative; skipping them keeps the cost on the active set.
    if (W < 1e-16) {
      off += terms;
      continue;
    }

    const double zshift = scratch.g[j];
    std::fill(scratch.grad_j.begin(), scratch.grad_j.end(), 0.0);
    for (std::size_t i = 0; i < terms; ++i) {
      const double d = scratch.z[off + i] - zshift;
      if (d < -40.0) continue;
      const double w = std::exp(d);
      const auto& a = lc.terms[i].a;
      for (const auto& [r, e] : a) scratch.grad_j[r] += w * e;
      const double Ww = W * w;
      for (const auto& [r1, e1] : a)
        for (const auto& [r2, e2] : a)
          hess[r1 * n + r2] += Ww * e1 * e2;
    }
    const double c1 = (1.0 / mu - 1.0) * W;
    for (std::size_t r1 = 0; r1 < n; ++r1) {
      const double gr1 = scratch.grad_j[r1];
      grad[r1] += W * gr1;
      if (gr1 == 0.0) continue;
      for (std::size_t r2 = 0; r2 < n; ++r2)
        hess[r1 * n + r2] += c1 * gr1 * scratch.grad_j[r2];
    }
    off += terms;
  }
  for (std::size_t r1 = 0; r1 < n; ++r1) {
    if (grad[r1] == 0.0) continue;
    for (std::size_t r2 = 0; r2 < n; ++r2)
      hess[r1 * n + r2] -= (1.0 / mu) * grad[r1] * grad[r2];
  }
  return F;
}

bool cholesky_factor(std::vector<double>& a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        a[i * n + i] = std::sqrt(s);
      } else {
        a[i * n + j] = s / a[j * n + j];
      }
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& L, std::size_t n,
                    std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * b[k];
    b[i] = s / L[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= L[k * n + i] * b[k];
    b[i] = s / L[i * n + i];
  }
}

struct FeasOutcome {
  bool feasible = false;
  double max_g = std::numeric_limits<double>::infinity();
  /// Certified extra log-objective the returned feasible point supports.
  double advance = 0.0;
};

// Warm-start state shared across the probes of one solve: the smoothed-max
// minimizer moves only O(bracket) between neighboring objective values, so
// reusing it keeps per-probe Newton counts small.
struct ProbeState {
  std::vector<double> y_min;
  bool has_min = false;
};

// Searches for a point with max-constraint <= 0 at fixed objective value t,
// minimizing a smoothed maximum with damped Newton steps under smoothing
// proportional to the current violation. Once inside the feasible region it
// keeps polishing briefly to deepen the margin, which the bisection turns
// into a certified jump of its lower end. `y` is both fallback warm start
// and result.
FeasOutcome find_feasible(const Compiled& c, double t, std::vector<double>& y,
                          double bracket_width, std::size_t& newton_iters,
                          ProbeState& state, EvalScratch& scratch) {
  const std::size_t n = c.n;
  for (std::size_t r = 0; r < n; ++r)
    y[r] = std::clamp(y[r], c.box_lo[r], c.box_hi[r]);

  FeasOutcome out;
  out.max_g = exact_max(c, t, y, scratch);
  if (out.max_g <= 0.0) {
    out.feasible = true;
    out.advance = certified_advance(c, t, y, scratch);
    return out;
  }
  if (n == 0) return out;  // nothing to optimize over

  // Start from whichever candidate point violates least at this objective.
  std::vector<double> yw = y;
  double start_max = out.max_g;
  if (state.has_min) {
    const double m = exact_max(c, t, state.y_min, scratch);
    if (m < start_max) {
      yw = state.y_min;
      start_max = m;
    }
  }
  if (start_max <= 0.0) {
    y = yw;
    out.feasible = true;
    out.max_g = start_max;
    out.advance = certified_advance(c, t, yw, scratch);
    return out;
  }

  const double logJ = std::max(1.0, std::log(double(c.cons.size())));
  // Smoothing floor: certificates only need to resolve the current bracket.
  const double mu_final =
      std::clamp(bracket_width / (50.0 * logJ), 1e-10, 1e-4);
  // A margin this deep lets the caller skip most of the bracket anyway.
  const double enough_margin = 0.45 * bracket_width;

  std::vector<double> grad, hess, work, step, y_try, y_feas;
  double lambda = 1e-10;
  double exact_now = start_max;
  int polish_left = 10;

  auto consider_feasible = [&](const std::vector<double>& point,
                               double exact_value) {
    if (exact_value > 0.0) return false;
    const double adv = certified_advance(c, t, point, scratch);
    if (!out.feasible || adv > out.advance) {
      out.feasible = true;
      out.advance = adv;
      out.max_g = exact_value;
      y_feas = point;
    }
    return out.advance >= enough_margin || polish_left <= 0;
  };
  auto finish_feasible = [&]() {
    y = y_feas;
    state.y_min = y_feas;
    state.has_min = true;
    return out;
  };

  for (int rung = 0; rung < 16; ++rung) {
    // Smoothing proportional to the current violation: far-out points get a
    // heavily smoothed landscape (long cheap steps), near-boundary points a
    // sharp one. This also keeps infeasibility certificates cheap at every
    // scale: at the minimum, f sits near violation * 1.3 while the
    // certificate threshold mu * logJ is near violation * 0.3.
    const double mu = std::clamp(0.3 * exact_now / logJ, mu_final, 1e-2);
    double exact = 0.0;
    double f = eval_softmax(c, t, yw, mu, true, grad, hess, exact, scratch);
    if (consider_feasible(yw, exact)) return finish_feasible();
    bool converged = false;
    double stall_floor = f;
    std::size_t stalled = 0;
    for (std::size_t it = 0; it < kMaxNewtonPerRung; ++it) {
      ++newton_iters;
      if (out.feasible && --polish_left <= 0) return finish_feasible();
      double gnorm = 0.0;
      for (double v : grad) gnorm += v * v;
      gnorm = std::sqrt(gnorm);
      if (gnorm <= kGradTol) {
        converged = true;
        break;
      }
      // Damped Newton direction.
      bool have_step = false;
      for (int attempt = 0; attempt < 12 && !have_step; ++attempt) {
        work = hess;
        for (std::size_t r = 0; r < n; ++r) work[r * n + r] += lambda;
        step = grad;
        if (cholesky_factor(work, n)) {
          cholesky_solve(work, n, step);
          double descent = 0.0;
          for (std::size_t r = 0; r < n; ++r) descent -= grad[r] * step[r];
          if (descent < 0.0) have_step = true;
        }
        if (!have_step) lambda = std::max(lambda * 100.0, 1e-12);
      }
      if (!have_step) {
        converged = true;  // flat to machine precision
        break;
      }

      double descent = 0.0;
      for (std::size_t r = 0; r < n; ++r) descent -= grad[r] * step[r];
      double stride = 1.0;
      bool accepted = false;
      y_try.resize(n);
      for (int ls = 0; ls < 45; ++ls) {
        for (std::size_t r = 0; r < n; ++r)
          y_try[r] = yw[r] - stride * step[r];
        double exact_try = 0.0;
        const double f_try = eval_softmax(c, t, y_try, mu, false, grad, hess,
                                          exact_try, scratch);
        if (exact_try <= 0.0 && consider_feasible(y_try, exact_try))
          return finish_feasible();
        if (f_try <= f + 1e-4 * stride * descent) {
          yw = y_try;
          f = f_try;
          exact = exact_try;
          accepted = true;
          break;
        }
        stride *= 0.5;
      }
      if (!accepted) {
        lambda = std::max(lambda * 100.0, 1e-12);
        if (++stalled >= 3) {
          converged = true;
          break;
        }
        continue;
      }
      lambda = std::max(lambda * 0.3, 1e-12);
      if (consider_feasible(yw, exact)) return finish_feasible();
      f = eval_softmax(c, t, yw, mu, true, grad, hess, exact, scratch);
      // Flat progress at a positive floor: resolved well enough for a sign
      // decision at this smoothing scale.
      if (stall_floor - f < 1e-4 * mu) {
        if (++stalled >= 4) {
          converged = true;
          break;
        }
      } else {
        stalled = 0;
        stall_floor = f;
      }
    }
    if (out.feasible) return finish_feasible();
    state.y_min = yw;
    state.has_min = true;
    out.max_g = exact;
    exact_now = std::max(exact, 0.0);
    if (converged && f - mu * logJ > 0.0) return out;  // certified infeasible
    if (converged && mu <= mu_final) return out;  // unresolved: infeasible
  }
  return out;  // rung budget exhausted: treated as infeasible
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kMaxIterations: return "max-iterations";
  }
  return "unknown";
}

GpSolution solve(const GpProblem& prob, double tol) {
  const Compiled c = compile(prob);
  const double tol_log = std::max(tol, 1e-12);
  EvalScratch scratch;

  const VarId obj = prob.objective_var;
  double lo = std::log(prob.lower[obj]);
  double hi = std::log(prob.upper[obj]);

  std::vector<double> y(c.n);
  if (!prob.initial.empty()) {
    if (prob.initial.size() != prob.num_vars)
      throw std::invalid_argument("initial point has wrong size");
    for (std::size_t v = 0, r = 0; v < prob.num_vars; ++v) {
      if (v == obj) continue;
      y[r] = std::clamp(checked_log(prob.initial[v], "initial point"),
                        c.box_lo[r], c.box_hi[r]);
      ++r;
    }
    lo = std::clamp(std::log(prob.initial[obj]), lo, hi);
  } else {
    for (std::size_t r = 0; r < c.n; ++r)
      y[r] = 0.5 * (c.box_lo[r] + c.box_hi[r]);
  }

  GpSolution sol;
  sol.values.assign(prob.num_vars, 0.0);

  auto finish = [&](double t_log, SolveStatus status) {
    sol.xi = std::exp(t_log);
    for (std::size_t v = 0, r = 0; v < prob.num_vars; ++v) {
      if (v == obj) continue;
      sol.values[v] = std::exp(y[r]);
      ++r;
    }
    sol.values[obj] = sol.xi;
    sol.kkt_residual = max_posyn_residual(c, t_log, y, scratch);
    sol.status = status;
  };

  // Establish a feasible lower end.
  ProbeState probe_state;
  auto probe = [&](double t_log, double width) {
    ++sol.feasibility_probes;
    return find_feasible(c, t_log, y, width, sol.newton_iterations,
                         probe_state, scratch);
  };

  FeasOutcome at_lo = probe(lo, hi - lo);
  if (!at_lo.feasible) {
    finish(lo, SolveStatus::kInfeasible);
    return sol;
  }
  double flo = std::min(lo + at_lo.advance, hi);
  if (hi - flo <= tol_log) {
    finish(flo, SolveStatus::kOptimal);
    return sol;
  }

  std::vector<double> y_best = y;
  FeasOutcome at_hi = probe(hi, hi - flo);
  if (at_hi.feasible) {
    finish(hi, SolveStatus::kOptimal);
    return sol;
  }
  y = y_best;

  // Grow from the certified end before bisecting, so a warm anchor close to
  // the optimum costs only a few probes. Feasible probes jump the certified
  // end by their polished margin on top of the probe position.
  double fhi = hi;
  double width = std::clamp(prob.growth_hint, 8.0 * tol_log, 0.7);
  width = std::min(width, (hi - flo) * 0.25);
  const double keep_gap = 0.25 * tol_log;
  while (sol.feasibility_probes < kMaxProbes) {
    const double cand = flo + std::max(width, keep_gap);
    if (cand >= fhi) break;
    const FeasOutcome r = probe(cand, fhi - flo);
    if (r.feasible) {
      flo = std::min(cand + r.advance, fhi - keep_gap);
      y_best = y;
      width *= 2.0;
    } else {
      fhi = cand;
      y = y_best;
      break;
    }
  }
  while (fhi - flo > tol_log && sol.feasibility_probes < kMaxProbes) {
    const double mid = 0.5 * (flo + fhi);
    const FeasOutcome r = probe(mid, fhi - flo);
    if (r.feasible) {
      flo = std::min(mid + r.advance, fhi - keep_gap);
      y_best = y;
    } else {
      fhi = mid;
      y = y_best;
    }
  }

  y = y_best;
  const bool tight = (fhi - flo) <= tol_log;
  finish(flo, SolveStatus::kOptimal);
  if (!tight || sol.kkt_residual > kKktTol)
    sol.status = SolveStatus::kMaxIterations;
  return sol;
}

double power_floor(const SystemConfig& cfg) {
  return 1e-8 * cfg.max_pilot_power_cap();
}

pilot::PilotAllocation snap_small_to_zero(pilot::PilotAllocation alloc,
                                          const SystemConfig& cfg) {
  const double cut = 10.0 * power_floor(cfg);
  for (std::size_t l = 0; l < alloc.num_cells; ++l)
    for (std::size_t k = 0; k < alloc.users_per_cell; ++k) {
      auto row = alloc.row(l, k);
      // Keep the row maximum even if tiny, so a user never ends up with an
      // empty pilot.
      const auto top = std::max_element(row.begin(), row.end());
      for (double& p : row)
        if (p < cut && &p != &*top) p = 0.0;
    }
  return alloc;
}

// ---------------------------------------------------------------------------
// Problem builders (all channel data divided by the noise power; the SINR is
// invariant under that joint rescaling).

namespace {

struct NormalizedNet {
  std::size_t users;
  std::vector<double> beta_n;    // (l, u)
  std::vector<double> received;  // 1 + sum_u p_u beta_n, per BS
};

NormalizedNet normalize(const netgen::NetworkRealization& net,
                        const SystemConfig& cfg) {
  NormalizedNet nn;
  nn.users = cfg.num_users();
  nn.beta_n.resize(cfg.num_cells * nn.users);
  const double inv_noise = 1.0 / cfg.noise_power_w;
  for (std::size_t i = 0; i < nn.beta_n.size(); ++i)
    nn.beta_n[i] = net.beta[i] * inv_noise;
  nn.received.assign(cfg.num_cells, 1.0);
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t u = 0; u < nn.users; ++u)
      nn.received[l] += cfg.data_power_w[u] * nn.beta_n[l * nn.users + u];
  return nn;
}

// Single-user SINR ceiling: only the noise-times-noise part of the
// denominator retained, total pilot power at its cap.
double xi_upper_bound(const NormalizedNet& nn, const SystemConfig& cfg) {
  double best = 0.0;
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      const std::size_t u = cfg.user_index(l, k);
      const double b = nn.beta_n[l * nn.users + u];
      best = std::max(best, static_cast<double>(cfg.num_antennas) * b * b *
                                cfg.data_power_w[u] *
                                static_cast<double>(cfg.pilot_len) *
                                cfg.pilot_power_max_w[u]);
    }
  return best;
}

}  // namespace

GpProblem build_maxmin_gp(const pilot::PilotAllocation& anchor,
                          const netgen::NetworkRealization& net,
                          const SystemConfig& cfg,
                          const closedform::Weights& w) {
  const std::size_t users = cfg.num_users();
  const std::size_t tp = cfg.pilot_len;
  const NormalizedNet nn = normalize(net, cfg);
  const double floor = power_floor(cfg);

  GpProblem prob;
  prob.num_vars = 1 + users * tp;
  prob.objective_var = kObjectiveVar;
  prob.lower.assign(prob.num_vars, floor);
  prob.upper.assign(prob.num_vars, 0.0);
  for (std::size_t u = 0; u < users; ++u) {
    const double cap = static_cast<double>(tp) * cfg.pilot_power_max_w[u];
    for (std::size_t b = 0; b < tp; ++b) {
      prob.upper[power_var(u, b, tp)] = cap;
    }
  }

  // Floor the anchor into the box, shaving any budget excess off the
  // largest entry so the warm point stays feasible.
  pilot::PilotAllocation warm = anchor;
  for (std::size_t u = 0; u < users; ++u) {
    auto row = warm.row(u / cfg.users_per_cell, u % cfg.users_per_cell);
    double sum = 0.0;
    for (double& p : row) {
      p = std::max(p, floor);
      sum += p;
    }
    const double cap = static_cast<double>(tp) * cfg.pilot_power_max_w[u];
    if (sum > cap) {
      auto it = std::max_element(row.begin(), row.end());
      *it -= sum - cap;
    }
  }

  // SINR constraints: objective * denominator / numerator <= 1.
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      const std::size_t u = cfg.user_index(l, k);
      const double beta_home = nn.beta_n[l * users + u];
      const double Cl = nn.received[l];

      // log of the monomial numerator coefficient
      double log_num = std::log(static_cast<double>(cfg.num_antennas)) +
                       2.0 * std::log(beta_home) +
                       std::log(cfg.data_power_w[u]);
      for (std::size_t b = 0; b < tp; ++b) {
        const double a = w.at(l, k, b);
        if (a < 0.0)
          throw std::invalid_argument("build_maxmin_gp: negative weight");
        if (a > 0.0) log_num += -2.0 * a * std::log(a);
      }
      const double inv_num = std::exp(-log_num);

      Posynomial g;
      auto push_term = [&](double coeff, Monomial&& m) {
        m.coeff = coeff * inv_num;
        m.mul_power(kObjectiveVar, 1.0);
        for (std::size_t b = 0; b < tp; ++b) {
          const double a = w.at(l, k, b);
          if (a > 0.0) m.mul_power(power_var(u, b, tp), -2.0 * a);
        }
        g.terms.push_back(std::move(m));
      };

      for (std::size_t v = 0; v < users; ++v) {
        const double bv = nn.beta_n[l * users + v];
        double coeff = bv * Cl;
        if (v != u)
          coeff += static_cast<double>(cfg.num_antennas) *
                   cfg.data_power_w[v] * bv * bv;
        // (sum_b sqrt(p_v^b p_u^b))^2 expanded into cross terms over (b, b').
        for (std::size_t b = 0; b < tp; ++b)
          for (std::size_t b2 = b; b2 < tp; ++b2) {
            const double mult = (b == b2) ? 1.0 : 2.0;
            Monomial m;
            m.mul_power(power_var(v, b, tp), 0.5);
            m.mul_power(power_var(u, b, tp), 0.5);
            m.mul_power(power_var(v, b2, tp), 0.5);
            m.mul_power(power_var(u, b2, tp), 0.5);
            push_term(coeff * mult, std::move(m));
          }
      }
      for (std::size_t b = 0; b < tp; ++b) {
        Monomial m;
        m.mul_power(power_var(u, b, tp), 1.0);
        push_term(Cl, std::move(m));  // correlated-noise part
      }
      prob.constraints.push_back(std::move(g));
    }

  // Average-power budgets.
  for (std::size_t u = 0; u < users; ++u) {
    Posynomial g;
    const double inv_cap =
        1.0 / (static_cast<double>(tp) * cfg.pilot_power_max_w[u]);
    for (std::size_t b = 0; b < tp; ++b) {
      Monomial m;
      m.coeff = inv_cap;
      m.mul_power(power_var(u, b, tp), 1.0);
      g.terms.push_back(std::move(m));
    }
    prob.constraints.push_back(std::move(g));
  }

  // Objective bracket: the warm point's approximated min-SINR is feasible by
  // construction; the ceiling is the single-user bound.
  double xi_lo = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k)
      xi_lo = std::min(xi_lo,
                       closedform::sinr_approx(warm, net, cfg, w, l, k));
  xi_lo *= 1.0 - 1e-9;
  double xi_hi = std::max(xi_upper_bound(nn, cfg), xi_lo * 2.0);
  prob.lower[kObjectiveVar] = xi_lo;
  prob.upper[kObjectiveVar] = xi_hi;

  prob.initial.assign(prob.num_vars, 0.0);
  prob.initial[kObjectiveVar] = xi_lo;
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t b = 0; b < tp; ++b)
      prob.initial[power_var(u, b, tp)] =
          warm.power_w[u * tp + b];
  return prob;
}

GpProblem build_assignment_gp(const pilot::PilotAssignment& assign,
                              const netgen::NetworkRealization& net,
                              const SystemConfig& cfg) {
  const std::size_t users = cfg.num_users();
  const std::size_t tp = cfg.pilot_len;
  if (assign.num_cells != cfg.num_cells ||
      assign.users_per_cell != cfg.users_per_cell || assign.pilot_len != tp)
    throw std::invalid_argument("build_assignment_gp: shape mismatch");
  const NormalizedNet nn = normalize(net, cfg);
  const double floor = power_floor(cfg);

  GpProblem prob;
  prob.num_vars = 1 + users;
  prob.objective_var = kObjectiveVar;
  prob.lower.assign(prob.num_vars, floor);
  prob.upper.assign(prob.num_vars, 0.0);
  for (std::size_t u = 0; u < users; ++u)
    prob.upper[1 + u] = static_cast<double>(tp) * cfg.pilot_power_max_w[u];

  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k) {
      const std::size_t u = cfg.user_index(l, k);
      const double beta_home = nn.beta_n[l * users + u];
      const double Cl = nn.received[l];
      const double num = static_cast<double>(cfg.num_antennas) * beta_home *
                         beta_home * cfg.data_power_w[u];

      Posynomial g;
      {
        // Same-user coherent term: q_u^2 cancels against the numerator.
        Monomial m;
        m.coeff = beta_home * Cl / num;
        m.mul_power(kObjectiveVar, 1.0);
        g.terms.push_back(std::move(m));
      }
      for (std::size_t v = 0; v < users; ++v) {
        if (v == u) continue;
        if (assign.pilot_index[v] != assign.pilot_index[u]) continue;
        const double bv = nn.beta_n[l * users + v];
        const double coeff = (bv * Cl + static_cast<double>(cfg.num_antennas) *
                                            cfg.data_power_w[v] * bv * bv) /
                             num;
        Monomial m;
        m.coeff = coeff;
        m.mul_power(kObjectiveVar, 1.0);
        m.mul_power(static_cast<VarId>(1 + v), 1.0);
        m.mul_power(static_cast<VarId>(1 + u), -1.0);
        g.terms.push_back(std::move(m));
      }
      {
        Monomial m;  // correlated noise
        m.coeff = Cl / num;
        m.mul_power(kObjectiveVar, 1.0);
        m.mul_power(static_cast<VarId>(1 + u), -1.0);
        g.terms.push_back(std::move(m));
      }
      prob.constraints.push_back(std::move(g));

      Posynomial budget;  // 0 <= q <= tau_p * P_max
      Monomial m;
      m.coeff = 1.0 / (static_cast<double>(tp) * cfg.pilot_power_max_w[u]);
      m.mul_power(static_cast<VarId>(1 + u), 1.0);
      budget.terms.push_back(std::move(m));
      prob.constraints.push_back(std::move(budget));
    }

  // Equal power at the per-user cap is feasible and seeds the bracket.
  pilot::PilotAssignment warm = assign;
  warm.power_w = cfg.pilot_power_max_w;
  const pilot::PilotAllocation warm_alloc = pilot::from_assignment(warm, cfg);
  double xi_lo = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < cfg.num_cells; ++l)
    for (std::size_t k = 0; k < cfg.users_per_cell; ++k)
      xi_lo = std::min(
          xi_lo, closedform::sinr_closed_form(warm_alloc, net, cfg, l, k));
  xi_lo *= 1.0 - 1e-9;
  prob.lower[kObjectiveVar] = xi_lo;
  prob.upper[kObjectiveVar] = std::max(xi_upper_bound(nn, cfg), xi_lo * 2.0);

  prob.initial.assign(prob.num_vars, 0.0);
  prob.initial[kObjectiveVar] = xi_lo;
  for (std::size_t u = 0; u < users; ++u)
    prob.initial[1 + u] = cfg.pilot_power_max_w[u];
  return prob;
}

std::string dump(const GpProblem& prob) {
  std::ostringstream os;
  os.precision(17);
  os << "maximize x" << prob.objective_var << "\n";
  for (std::size_t j = 0; j < prob.constraints.size(); ++j) {
    os << "constraint " << j << ": sum <= 1\n";
    for (const Monomial& m : prob.constraints[j].terms) {
      os << "  " << m.coeff;
      for (const auto& [id, e] : m.exponents) os << " x" << id << "^" << e;
      os << "\n";
    }
  }
  for (std::size_t v = 0; v < prob.num_vars; ++v)
    os << "bound x" << v << " in [" << prob.lower[v] << ", " << prob.upper[v]
       << "]\n";
  return os.str();
}

}  // namespace pilotopt::gp
