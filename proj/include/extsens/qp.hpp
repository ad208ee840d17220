#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "extsens/error.hpp"
#include "extsens/math.hpp"
#include "extsens/paired_data.hpp"
#include "extsens/uncertainty.hpp"

namespace extsens {

/// Critical value for the squared deviate: a one-sided test at level a uses
/// the chi-square(1) quantile at 1-2a, a two-sided test the quantile at 1-a.
inline double crit_for(Side side, double level) {
  double p = side == Side::two_sided ? 1.0 - level : 1.0 - 2.0 * level;
  return chi2_1_quantile(p);
}

/// Box-and-budget quadratic program for the worst-case squared deviate:
/// minimize (t - sum_i(q_i2 + d_i x_i))^2 - crit * sum_i d_i^2 x_i (1 - x_i)
/// over lower <= x_i <= upper, sum_i x_i <= budget_rhs.
struct QpProblem {
  std::vector<double> d;       // per-pair gaps q_i1 - q_i2, all >= 0
  std::vector<double> s;       // per-pair sums q_i1 + q_i2
  double t_obs = 0.0;
  double crit = 0.0;
  double lower = 0.5;
  double upper = 0.5;          // gamma/(1+gamma)
  double budget_rhs = 0.0;     // I * worst-case mean bound
  double mean_bound_mu = 0.5;  // maximizing mu, for diagnostics

  std::size_t size() const { return d.size(); }

  /// t_obs minus the contribution of every pair at x = 0: sum of q_i2.
  double gap_offset() const {
    double a = t_obs;
    for (std::size_t i = 0; i < d.size(); ++i) a -= 0.5 * (s[i] - d[i]);
    return a;
  }

  double expectation(const std::vector<double>& x) const {
    double e = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      e += 0.5 * (s[i] - d[i]) + d[i] * x[i];
    return e;
  }

  double variance(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      v += d[i] * d[i] * x[i] * (1.0 - x[i]);
    return v;
  }

  double zeta(const std::vector<double>& x) const {
    double e = t_obs - expectation(x);
    return e * e - crit * variance(x);
  }
};

struct QpSolution {
  std::vector<double> pi;      // worst-case maximal assignment probabilities
  double objective = 0.0;      // min zeta
  double deviate_sq = 0.0;
  double kkt_residual = 0.0;
  double budget_multiplier = 0.0;
  bool budget_active = false;
  std::vector<std::size_t> at_lower;
  std::vector<std::size_t> at_upper;
};

struct AnalysisResult {
  bool rejected = false;
  double p_beta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> worst_pi;
  double objective = 0.0;
  double deviate_sq = 0.0;
  double kkt_residual = 0.0;
  double hajek_ratio = 0.0;
  double worst_mean = 0.0;    // max of E[Z'q] over the feasible set
  double budget_rhs = 0.0;
  double mean_bound_mu = 0.5;
  bool conventional_path = false;    // gammabar == gamma closed form
  bool guard_ok = true;              // t_obs on the rejecting side of worst_mean
  bool rejects_at_identity = true;   // randomization test at gamma = 1
  std::vector<std::string> warnings;
};

/// Assembles the QP at test level `level` (the alpha minus beta already
/// applied by the caller). The sample must be oriented: every gap >= 0.
inline QpProblem assemble_at_level(const OrientedSample& oriented,
                                   const SensitivityBudget& budget,
                                   const UncertaintySetSpec& spec,
                                   double level) {
  budget.validate();
  spec.validate(budget);
  const PairedSample& s = oriented.sample;
  if (spec.pair_count != s.size())
    throw ValidationError("pair_count", "spec pair count disagrees with sample");
  QpProblem p;
  p.d.resize(s.size());
  p.s.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.q[i][0] < s.q[i][1])
      throw ValidationError("unsorted_sample",
                            "orient_for_alternative must run before assembly");
    p.d[i] = s.q[i][0] - s.q[i][1];
    p.s[i] = s.q[i][0] + s.q[i][1];
  }
  p.t_obs = s.t_obs;
  p.crit = crit_for(budget.side, level);
  p.lower = 0.5;
  p.upper = gamma_to_prob(budget.gamma);
  MeanBoundMaximum m = maximize_mean_bound(spec, budget);
  p.mean_bound_mu = m.mu;
  p.budget_rhs = static_cast<double>(s.size()) * m.bound;
  return p;
}

inline QpProblem assemble(const OrientedSample& oriented,
                          const SensitivityBudget& budget,
                          const UncertaintySetSpec& spec) {
  if (!(budget.alpha > budget.effective_beta()))
    throw ValidationError("alpha_domain", "need beta < alpha");
  return assemble_at_level(oriented, budget, spec,
                           budget.alpha - budget.effective_beta());
}

namespace detail {

/// Greedy solution of max sum d_i x_i subject to the box and budget; spends
/// budget slack on the largest gaps first.
inline std::vector<double> knapsack_max_gap(const std::vector<double>& d,
                                            double lo, double hi, double rhs) {
  const std::size_t n = d.size();
  std::vector<double> x(n, lo);
  double slack = rhs - lo * static_cast<double>(n);
  if (slack <= 0.0 || hi <= lo) return x;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  for (std::size_t j : idx) {
    double take = std::min(hi - lo, slack);
    if (take <= 0.0) break;
    x[j] = lo + take;
    slack -= take;
  }
  return x;
}

struct BoxSolve {
  double theta = 0.0;
  double sum_x = 0.0;
  int iterations = 0;
};

/// Minimizes the Lagrangian at a fixed budget multiplier over the box alone.
/// The KKT system reduces to a monotone scalar fixed point in
/// theta = A - sum d_i x_i with x_i = clamp(1/2 + (theta - lam/(2 d_i)) /
/// (crit d_i), lo, hi); psi(theta) = theta - A + sum d_i x_i(theta) has slope
/// >= 1, so the root is unique.
inline BoxSolve solve_box(const std::vector<double>& d, double A, double crit,
                          double lo, double hi, double lam,
                          std::vector<double>& x) {
  const std::size_t n = d.size();
  double sum_d = std::accumulate(d.begin(), d.end(), 0.0);
  auto fill = [&](double theta) {
    double sx = 0.0, sdx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.5 + (theta - lam / (2.0 * d[i])) / (crit * d[i]);
      v = std::clamp(v, lo, hi);
      x[i] = v;
      sx += v;
      sdx += d[i] * v;
    }
    return std::pair<double, double>{sx, sdx};
  };
  BoxSolve out;
  if (hi <= lo) {
    auto [sx, sdx] = fill(0.0);
    out.theta = A - sdx;
    out.sum_x = sx;
    return out;
  }
  double t_lo = A - sum_d * hi, t_hi = A - sum_d * lo;
  double f_lo = t_lo - A + fill(t_lo).second;   // <= 0
  double f_hi = t_hi - A + fill(t_hi).second;   // >= 0
  double lo_b = t_lo, hi_b = t_hi;
  const double xtol = 1e-14 * std::max(1.0, std::fabs(t_hi) + std::fabs(t_lo));
  double theta = 0.5 * (lo_b + hi_b);
  for (int it = 0; it < 200; ++it) {
    ++out.iterations;
    if (hi_b - lo_b <= xtol) break;
    theta = (lo_b * f_hi - hi_b * f_lo) / (f_hi - f_lo);
    if (!(theta > lo_b && theta < hi_b)) theta = 0.5 * (lo_b + hi_b);
    double f = theta - A + fill(theta).second;
    if (f == 0.0) break;
    if (f < 0.0) {
      lo_b = theta;
      f_lo = f;
      f_hi *= 0.5;
    } else {
      hi_b = theta;
      f_hi = f;
      f_lo *= 0.5;
    }
  }
  auto [sx, sdx] = fill(theta);
  out.theta = A - sdx;
  out.sum_x = sx;
  return out;
}

}  // namespace detail

/// Global minimizer of the convex quadratic zeta over the box and budget
/// constraints. Pairs with zero gap drop out of the objective and sit at 1/2,
/// which relaxes the budget as much as possible for the remaining pairs.
/// Solved by bisection on the budget multiplier with an exact inner box solve;
/// throws NumericalError if the iteration cap is exhausted.
inline QpSolution minimize_zeta(const QpProblem& prob,
                                int iteration_cap = 10000) {
  const std::size_t n = prob.size();
  QpSolution sol;
  sol.pi.assign(n, 0.5);

  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < n; ++i)
    if (prob.d[i] > 0.0) act.push_back(i);
  const std::size_t m = act.size();
  double budget = prob.budget_rhs - 0.5 * static_cast<double>(n - m);

  auto finalize = [&](const std::vector<double>& xa, double lam,
                      bool budget_active) {
    for (std::size_t j = 0; j < m; ++j) sol.pi[act[j]] = xa[j];
    sol.objective = prob.zeta(sol.pi);
    double var = prob.variance(sol.pi);
    double e = prob.t_obs - prob.expectation(sol.pi);
    sol.deviate_sq = var > 0.0 ? e * e / var : (e == 0.0 ? 0.0 : kInf);
    sol.budget_multiplier = lam;
    sol.budget_active = budget_active;
    const double bnd_tol = 1e-9;
    for (std::size_t j = 0; j < m; ++j) {
      if (xa[j] <= prob.lower + bnd_tol) sol.at_lower.push_back(act[j]);
      if (xa[j] >= prob.upper - bnd_tol) sol.at_upper.push_back(act[j]);
    }
    return sol;
  };

  if (m == 0) {
    std::vector<double> empty;
    return finalize(empty, 0.0, false);
  }

  // Normalize gaps so tolerances are scale-free; zeta scales by c^2 and the
  // minimizer is unchanged.
  std::vector<double> d(m);
  double dmax = 0.0;
  for (std::size_t j = 0; j < m; ++j) dmax = std::max(dmax, prob.d[act[j]]);
  for (std::size_t j = 0; j < m; ++j) d[j] = prob.d[act[j]] / dmax;
  const double A = prob.gap_offset() / dmax;
  const double lo = prob.lower, hi = prob.upper;
  std::vector<double> x(m, lo);

  if (prob.crit <= 0.0) {
    // Pure squared-distance objective: match sum d_i x_i to A if feasible.
    double u_min = 0.0;
    for (double v : d) u_min += v * lo;
    std::vector<double> xmax = detail::knapsack_max_gap(d, lo, hi, budget);
    double u_max = 0.0;
    for (std::size_t j = 0; j < m; ++j) u_max += d[j] * xmax[j];
    if (A <= u_min) return finalize(x, 0.0, false);
    if (A >= u_max) {
      double sx = std::accumulate(xmax.begin(), xmax.end(), 0.0);
      return finalize(xmax, 0.0, sx >= budget - 1e-11 * static_cast<double>(m));
    }
    // walk down from the knapsack point until sum d x == A
    double u = u_max;
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    for (std::size_t j : idx) {
      double drop = d[j] * (xmax[j] - lo);
      if (u - drop >= A) {
        u -= drop;
        xmax[j] = lo;
      } else {
        xmax[j] -= (u - A) / d[j];
        u = A;
        break;
      }
    }
    return finalize(xmax, 0.0, false);
  }

  int budget_spent = 0;
  auto box_at = [&](double lam) {
    auto r = detail::solve_box(d, A, prob.crit, lo, hi, lam, x);
    budget_spent += r.iterations + 1;
    if (budget_spent > iteration_cap)
      throw NumericalError("qp_iteration_cap",
                           "budget-multiplier search exceeded iteration cap",
                           r.sum_x - budget);
    return r;
  };

  const double feas_tol = 1e-11 * static_cast<double>(m);
  detail::BoxSolve free = box_at(0.0);
  if (free.sum_x <= budget + feas_tol) return finalize(x, 0.0, false);

  if (budget <= static_cast<double>(m) * lo + feas_tol) {
    // Budget pins every coordinate at the lower bound.
    std::fill(x.begin(), x.end(), lo);
    double u = 0.0;
    for (std::size_t j = 0; j < m; ++j) u += d[j] * x[j];
    double lam = std::max(0.0, 2.0 * (A - u) * 1.0);  // d normalized, max = 1
    return finalize(x, lam, true);
  }

  double lam_lo = 0.0, g_lo = free.sum_x - budget;
  double lam_hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    if (box_at(lam_hi).sum_x - budget <= 0.0) break;
    lam_lo = lam_hi;
    lam_hi *= 4.0;
  }
  double g_hi = box_at(lam_hi).sum_x - budget;
  double lam = lam_hi;
  for (int it = 0; it < 300; ++it) {
    if (std::fabs(g_hi) <= feas_tol) {
      lam = lam_hi;
      break;
    }
    if (lam_hi - lam_lo <= 1e-15 * std::max(1.0, lam_hi)) break;
    lam = (lam_lo * g_hi - lam_hi * g_lo) / (g_hi - g_lo);
    if (!(lam > lam_lo && lam < lam_hi)) lam = 0.5 * (lam_lo + lam_hi);
    double g = box_at(lam).sum_x - budget;
    if (std::fabs(g) <= feas_tol) break;
    if (g > 0.0) {
      lam_lo = lam;
      g_lo = g;
      g_hi *= 0.5;
    } else {
      lam_hi = lam;
      g_hi = g;
      g_lo *= 0.5;
    }
  }
  detail::BoxSolve fin = box_at(lam);
  if (fin.sum_x > budget + feas_tol) {
    // land on the feasible side of the bracket
    fin = box_at(lam_hi);
    lam = lam_hi;
  }
  return finalize(x, lam * dmax * dmax, true);
}

/// Max-norm violation of the KKT conditions at the reported solution, in the
/// gap-normalized scale the solver works in.
inline double kkt_residual(const QpProblem& prob, const QpSolution& sol) {
  const std::size_t n = prob.size();
  double dmax = 0.0;
  for (double v : prob.d) dmax = std::max(dmax, v);
  if (dmax == 0.0) return 0.0;
  double u = 0.0;
  for (std::size_t i = 0; i < n; ++i) u += (prob.d[i] / dmax) * sol.pi[i];
  const double A = prob.gap_offset() / dmax;
  const double lam = sol.budget_multiplier / (dmax * dmax);
  double res = 0.0;
  double sum_x = 0.0;
  const double tol = 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    sum_x += sol.pi[i];
    double di = prob.d[i] / dmax;
    if (di == 0.0) continue;
    double g = -2.0 * di * (A - u) + prob.crit * di * di * (2.0 * sol.pi[i] - 1.0) + lam;
    if (sol.pi[i] <= prob.lower + tol)
      res = std::max(res, std::max(0.0, -g));
    else if (sol.pi[i] >= prob.upper - tol)
      res = std::max(res, std::max(0.0, g));
    else
      res = std::max(res, std::fabs(g));
  }
  res = std::max(res, sum_x - prob.budget_rhs);  // primal feasibility
  if (!sol.budget_active)
    res = std::max(res, lam);  // multiplier must vanish off the constraint
  else
    res = std::max(res, lam * std::max(0.0, prob.budget_rhs - sum_x));
  return res;
}

namespace detail {

struct ConventionalTest {
  double expectation = 0.0;
  double sd = 0.0;
  double deviate = 0.0;
  double p_one_sided = 1.0;
  bool degenerate = false;
};

/// Closed-form worst case at gammabar == gamma: every maximal probability at
/// the cap.
inline ConventionalTest conventional_test(const OrientedSample& oriented,
                                          double gamma) {
  const double cap = gamma_to_prob(gamma);
  ConventionalTest out;
  double var = 0.0;
  for (std::size_t i = 0; i < oriented.sample.size(); ++i) {
    const auto& qi = oriented.sample.q[i];
    double d = qi[0] - qi[1];
    out.expectation += qi[1] + d * cap;
    var += d * d * cap * (1.0 - cap);
  }
  out.sd = std::sqrt(var);
  if (out.sd == 0.0) {
    out.degenerate = true;
    out.p_one_sided = 1.0;
    return out;
  }
  out.deviate = (oriented.sample.t_obs - out.expectation) / out.sd;
  out.p_one_sided = 1.0 - norm_cdf(out.deviate);
  return out;
}

inline double side_pvalue(double p_one_sided, Side side) {
  if (side == Side::two_sided) return std::min(1.0, 2.0 * p_one_sided);
  return p_one_sided;
}

inline OrientedSample orient_for_test(const PairedSample& sample, Side side) {
  if (side != Side::two_sided) return orient_for_alternative(sample, side);
  // deviation side: compare t_obs to its null expectation sum (q1+q2)/2
  double null_mean = 0.0;
  for (const auto& qi : sample.q) null_mean += 0.5 * (qi[0] + qi[1]);
  return orient_for_alternative(
      sample, sample.t_obs >= null_mean ? Side::greater : Side::less);
}

inline double hajek_ratio(const std::vector<double>& gaps) {
  double sum_sq = 0.0, max_sq = 0.0;
  for (double g : gaps) {
    sum_sq += g * g;
    max_sq = std::max(max_sq, g * g);
  }
  return max_sq > 0.0 ? sum_sq / max_sq : 0.0;
}

}  // namespace detail

/// Orientation used by the tests: the requested side for one-sided
/// alternatives, the deviation side for two-sided ones.
inline OrientedSample orient_for_test(const PairedSample& sample, Side side) {
  return detail::orient_for_test(sample, side);
}

namespace detail {

inline AnalysisResult reject_impl(const PairedSample& sample,
                                  const SensitivityBudget& budget,
                                  const UncertaintySetSpec& spec,
                                  bool diagonal_conventional) {
  budget.validate();
  spec.validate(budget);
  OrientedSample oriented = detail::orient_for_test(sample, budget.side);
  AnalysisResult res;
  res.hajek_ratio = detail::hajek_ratio(oriented.gaps);
  if (res.hajek_ratio > 0.0 && res.hajek_ratio < 20.0)
    res.warnings.push_back(
        "hajek_condition: a single pair dominates the variance; the normal "
        "approximation may be poor");

  detail::ConventionalTest identity =
      detail::conventional_test(oriented, 1.0);
  res.rejects_at_identity =
      !identity.degenerate &&
      detail::side_pvalue(identity.p_one_sided, budget.side) <= budget.alpha;
  if (!res.rejects_at_identity)
    res.warnings.push_back(
        "no_rejection_at_identity: the randomization test does not reject; "
        "sensitivity analysis reported for completeness");

  if (res.hajek_ratio == 0.0) {
    res.rejected = false;
    res.worst_pi.assign(sample.size(), 0.5);
    res.warnings.push_back("degenerate: all within-pair gaps are zero");
    return res;
  }

  if (diagonal_conventional && budget.gammabar == budget.gamma) {
    res.conventional_path = true;
    detail::ConventionalTest t =
        detail::conventional_test(oriented, budget.gamma);
    res.worst_pi.assign(sample.size(), gamma_to_prob(budget.gamma));
    res.worst_mean = t.expectation;
    res.deviate_sq = t.degenerate ? 0.0 : t.deviate * t.deviate;
    res.guard_ok = oriented.sample.t_obs >= t.expectation;
    if (t.degenerate) {
      res.rejected = false;
      res.warnings.push_back("degenerate: worst-case variance is zero");
      return res;
    }
    res.rejected =
        detail::side_pvalue(t.p_one_sided, budget.side) <= budget.alpha;
    return res;
  }

  QpProblem prob = assemble(oriented, budget, spec);
  QpSolution sol = minimize_zeta(prob);
  sol.kkt_residual = kkt_residual(prob, sol);
  res.worst_pi = sol.pi;
  res.objective = sol.objective;
  res.deviate_sq = sol.deviate_sq;
  res.kkt_residual = sol.kkt_residual;
  res.budget_rhs = prob.budget_rhs;
  res.mean_bound_mu = prob.mean_bound_mu;

  std::vector<double> xmax = detail::knapsack_max_gap(
      prob.d, prob.lower, prob.upper, prob.budget_rhs);
  res.worst_mean = prob.expectation(xmax);
  res.guard_ok = oriented.sample.t_obs >=
                 res.worst_mean - 1e-12 * (1.0 + std::fabs(res.worst_mean));
  res.rejected = sol.objective >= 0.0 && res.guard_ok;
  return res;
}

}  // namespace detail

/// Level-alpha decision for the extended sensitivity analysis. Rejects when
/// the minimized zeta is nonnegative and the observed statistic sits on the
/// rejecting side of the worst-case mean (the squared deviate cannot tell the
/// sides apart on its own). At gammabar == gamma the closed-form conventional
/// bound applies, with no beta involved.
inline AnalysisResult reject(const PairedSample& sample,
                             const SensitivityBudget& budget,
                             const UncertaintySetSpec& spec) {
  return detail::reject_impl(sample, budget, spec, true);
}

/// Same decision run through the quadratic program at every cell, the
/// diagonal included. This is the uniform protocol behind the published
/// simulation tables; it is more conservative than `reject` at
/// gammabar == gamma because the minimization ranges over the whole box at
/// level alpha - beta instead of evaluating the conventional corner at alpha.
inline AnalysisResult reject_qp_protocol(const PairedSample& sample,
                                         const SensitivityBudget& budget,
                                         const UncertaintySetSpec& spec) {
  return detail::reject_impl(sample, budget, spec, false);
}

/// Worst-case p-value bound p_beta. For gammabar < gamma in the
/// superpopulation frame the reported value embeds the additive beta: the
/// rejection boundary is searched over nominal levels a with the internal
/// test run at a - beta. At gammabar == gamma the conventional bound is
/// returned unchanged, and the study-population frame adds nothing.
inline double worst_case_pvalue(const PairedSample& sample,
                                const SensitivityBudget& budget,
                                const UncertaintySetSpec& spec) {
  budget.validate();
  spec.validate(budget);
  OrientedSample oriented = detail::orient_for_test(sample, budget.side);

  if (detail::hajek_ratio(oriented.gaps) == 0.0) return 1.0;

  if (budget.gammabar == budget.gamma) {
    detail::ConventionalTest t =
        detail::conventional_test(oriented, budget.gamma);
    if (t.degenerate) return 1.0;
    return detail::side_pvalue(t.p_one_sided, budget.side);
  }

  const double beta = budget.effective_beta();
  QpProblem prob = assemble_at_level(oriented, budget, spec, 0.25);
  auto min_zeta_at = [&](double level) {
    QpProblem p = prob;
    p.crit = crit_for(budget.side, level - beta);
    return minimize_zeta(p).objective;
  };

  double lo = beta + 1e-12, hi = 1.0 - 1e-12;
  double f_lo = min_zeta_at(lo);
  double f_hi = min_zeta_at(hi);
  double p;
  if (f_lo >= 0.0)
    p = beta;  // floor: the uncertainty set's tail mass is irreducible
  else if (f_hi < 0.0)
    p = 1.0;
  else {
    while (hi - lo > 1e-6) {
      double mid = 0.5 * (lo + hi);
      if (min_zeta_at(mid) >= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    p = 0.5 * (lo + hi);
  }

  // When t_obs does not exceed the worst-case mean the one-sided bound is at
  // least 1/2 + beta; report the larger of the boundary level and the value
  // at the mean-maximizing feasible point.
  std::vector<double> xmax = detail::knapsack_max_gap(
      prob.d, prob.lower, prob.upper, prob.budget_rhs);
  double worst_mean = prob.expectation(xmax);
  if (oriented.sample.t_obs < worst_mean && budget.side != Side::two_sided) {
    double var = prob.variance(xmax);
    double z = var > 0.0
                   ? (oriented.sample.t_obs - worst_mean) / std::sqrt(var)
                   : 0.0;
    p = std::max(p, std::min(1.0, beta + (1.0 - norm_cdf(z))));
  }
  return p;
}

/// Decision plus p-value in one call; what the CLI reports.
inline AnalysisResult run_analysis(const PairedSample& sample,
                                   const SensitivityBudget& budget,
                                   const UncertaintySetSpec& spec) {
  AnalysisResult res = reject(sample, budget, spec);
  res.p_beta = worst_case_pvalue(sample, budget, spec);
  return res;
}

}  // namespace extsens
