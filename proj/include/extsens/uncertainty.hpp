#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "extsens/error.hpp"
#include "extsens/math.hpp"
#include "extsens/paired_data.hpp"

namespace extsens {

enum class InferenceFrame { superpopulation, study_population };

enum class UncertaintyKind { clt, hoeffding, bennett, sample };

/// Sensitivity parameters for one analysis: gamma bounds the maximal bias,
/// gammabar the typical bias, beta the uncertainty-set tail mass, alpha the
/// test level. In the study-population frame the set has no slack and beta
/// is forced to zero.
struct SensitivityBudget {
  double gamma = 1.0;     // >= 1, may be +inf
  double gammabar = 1.0;  // 1 <= gammabar <= gamma
  double beta = 0.005;
  double alpha = 0.05;
  Side side = Side::greater;
  InferenceFrame frame = InferenceFrame::superpopulation;

  double effective_beta() const {
    return frame == InferenceFrame::study_population ? 0.0 : beta;
  }

  /// Bias-model part only: gamma, gammabar, beta. The test level alpha is
  /// not involved in uncertainty-set computations.
  void validate_bias() const {
    if (!(gamma >= 1.0))
      throw ValidationError("gamma_domain", "gamma must be >= 1");
    if (!(gammabar >= 1.0) || gammabar > gamma)
      throw ValidationError("gammabar_domain",
                            "need 1 <= gammabar <= gamma");
    if (frame == InferenceFrame::superpopulation &&
        !(beta > 0.0 && beta <= 0.5))
      throw ValidationError("beta_domain", "beta must lie in (0, 0.5]");
  }

  void validate() const {
    validate_bias();
    if (!(alpha > effective_beta() && alpha < 1.0))
      throw ValidationError("alpha_domain", "need beta < alpha < 1");
  }
};

struct UncertaintySetSpec {
  UncertaintyKind kind = UncertaintyKind::clt;
  std::size_t pair_count = 0;

  void validate(const SensitivityBudget& budget) const {
    if (pair_count == 0)
      throw ValidationError("pair_count", "need at least one pair");
    if (budget.frame == InferenceFrame::study_population &&
        kind != UncertaintyKind::sample)
      throw ValidationError(
          "frame_kind_mismatch",
          "study-population inference uses the sample-level bound");
    if (budget.frame == InferenceFrame::superpopulation &&
        kind == UncertaintyKind::sample)
      throw ValidationError("frame_kind_mismatch",
                            "the sample-level bound has no tail parameter");
  }
};

/// gamma / (1 + gamma), the per-pair cap on the maximal assignment
/// probability; 1 when gamma is infinite.
inline double gamma_to_prob(double gamma) {
  if (!(gamma >= 1.0))
    throw ValidationError("gamma_domain", "gamma must be >= 1");
  if (std::isinf(gamma)) return 1.0;
  return gamma / (1.0 + gamma);
}

/// Bhatia-Davis bound on var(Pi*) for a variable in [1/2, gamma/(1+gamma)]
/// with mean mu.
inline double variance_bound(double gamma, double mu) {
  const double cap = gamma_to_prob(gamma);
  const double tol = 1e-12;
  if (mu < 0.5 - tol || mu > cap + tol)
    throw ValidationError("mu_domain", "mean must lie in [1/2, gamma/(1+gamma)]");
  mu = std::clamp(mu, 0.5, cap);
  return (cap - mu) * (mu - 0.5);
}

namespace detail {

/// Slack a solving exp(-I nu^2/b^2 h(a b / nu^2)) = beta, i.e. the Bennett
/// bound at tail mass beta. Monotone in a; bracketed root-finding to 1e-12.
inline double bennett_slack(double nu2, double b, std::size_t pairs,
                            double beta) {
  if (nu2 <= 0.0 || b <= 0.0) return 0.0;
  const double target = std::log(1.0 / beta);
  auto lhs = [&](double a) {
    return static_cast<double>(pairs) * nu2 / (b * b) *
           bennett_h(a * b / nu2) - target;
  };
  double hi = b;
  while (lhs(hi) < 0.0) hi *= 2.0;  // h grows superlinearly, so this exits
  return find_root(lhs, 0.0, hi, 1e-12);
}

}  // namespace detail

namespace detail {

inline double mean_upper_bound_unclipped(const UncertaintySetSpec& spec,
                                         const SensitivityBudget& budget,
                                         double mu) {
  const double cap = gamma_to_prob(budget.gamma);
  const double bar_cap = gamma_to_prob(budget.gammabar);
  const double tol = 1e-12;
  if (mu < 0.5 - tol || mu > bar_cap + tol)
    throw ValidationError("mu_domain",
                          "mean must lie in [1/2, gammabar/(1+gammabar)]");
  mu = std::clamp(mu, 0.5, bar_cap);
  const double n = static_cast<double>(spec.pair_count);
  const double b = cap - 0.5;
  switch (spec.kind) {
    case UncertaintyKind::sample:
      return mu;
    case UncertaintyKind::clt:
      return mu + norm_quantile(1.0 - budget.beta) *
                      std::sqrt(variance_bound(budget.gamma, mu) / n);
    case UncertaintyKind::hoeffding:
      return mu + b * std::sqrt(std::log(1.0 / budget.beta) / (2.0 * n));
    case UncertaintyKind::bennett:
      return mu + bennett_slack(variance_bound(budget.gamma, mu), b,
                                spec.pair_count, budget.beta);
  }
  return mu;
}

}  // namespace detail

/// Upper endpoint of the 1-beta uncertainty set for the average of Pi*, given
/// the superpopulation mean mu. Clipped at gamma/(1+gamma) since no realized
/// average can exceed the per-pair cap.
inline double mean_upper_bound(const UncertaintySetSpec& spec,
                               const SensitivityBudget& budget, double mu) {
  budget.validate_bias();
  spec.validate(budget);
  return std::min(detail::mean_upper_bound_unclipped(spec, budget, mu),
                  gamma_to_prob(budget.gamma));
}

struct MeanBoundMaximum {
  double mu;
  double bound;
};

/// Maximizes the uncertainty-set upper endpoint over mu <=
/// gammabar/(1+gammabar). The unclipped bound is increasing below the
/// midpoint (cap + 1/2)/2, so when the admissible range ends before the
/// midpoint the endpoint wins outright; otherwise the unique stationary point
/// on [midpoint, endpoint] is located by derivative-sign bisection to 1e-10.
/// The returned bound is clipped at the per-pair cap.
inline MeanBoundMaximum maximize_mean_bound(const UncertaintySetSpec& spec,
                                            const SensitivityBudget& budget) {
  budget.validate_bias();
  spec.validate(budget);
  const double cap = gamma_to_prob(budget.gamma);
  const double bar_cap = gamma_to_prob(budget.gammabar);
  auto raw = [&](double mu) {
    return detail::mean_upper_bound_unclipped(spec, budget, mu);
  };
  auto clipped = [&](double mu) { return std::min(raw(mu), cap); };

  if (spec.kind == UncertaintyKind::sample ||
      spec.kind == UncertaintyKind::hoeffding || budget.gamma <= 1.0)
    return {bar_cap, clipped(bar_cap)};  // slack independent of mu

  const double midpoint = 0.5 * (cap + 0.5);
  if (bar_cap <= midpoint) return {bar_cap, clipped(bar_cap)};

  double lo = midpoint, hi = bar_cap;
  const double step = 1e-7 * (cap - 0.5);
  auto deriv_sign = [&](double mu) {
    double a = std::max(mu - step, lo), b2 = std::min(mu + step, hi);
    return raw(b2) - raw(a);
  };
  if (deriv_sign(hi) >= 0.0) return {hi, clipped(hi)};
  if (deriv_sign(lo) <= 0.0) return {lo, clipped(lo)};
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    if (deriv_sign(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double mu = 0.5 * (lo + hi);
  // Guard against flat spots: the maximizer never loses to the endpoints.
  double best = raw(mu);
  if (raw(bar_cap) > best) return {bar_cap, clipped(bar_cap)};
  if (raw(midpoint) > best) return {midpoint, clipped(midpoint)};
  return {mu, std::min(best, cap)};
}

}  // namespace extsens
