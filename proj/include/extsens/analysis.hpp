#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "extsens/error.hpp"
#include "extsens/parallel.hpp"
#include "extsens/qp.hpp"

namespace extsens {

struct SensitivityValue {
  double gamma_star = 1.0;
  bool defined = true;  // false when the randomization test already retains
};

struct CurvePoint {
  double gamma = 1.0;
  double gammabar_star = 1.0;
  bool saturated = false;  // rejects all the way to the diagonal
  bool no_reject = false;  // retains even at gammabar = 1
  bool scanned = false;    // non-monotone bracket, fell back to a grid scan
};

struct SensitivityCurve {
  std::vector<CurvePoint> points;
  double gamma_star = 1.0;      // conventional value, curve meets y = x here
  double gammabar_limit = 1.0;  // frontier as gamma tends to infinity
};

struct SensitivityInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;  // endpoints are log(tau) for multiplicative models
  bool empty = false;
};

/// 40 log-spaced gammas on [1.01, 50] plus infinity, enough to resolve the
/// frontier shape at desk scale.
inline std::vector<double> default_gamma_grid() {
  std::vector<double> g;
  const int n = 40;
  for (int i = 0; i < n; ++i)
    g.push_back(std::exp(std::log(1.01) +
                         (std::log(50.0) - std::log(1.01)) * i / (n - 1)));
  g.push_back(kInf);
  return g;
}

namespace detail {

inline bool decide(const PairedSample& sample, const SensitivityBudget& proto,
                   UncertaintySetSpec spec, double gamma, double gammabar) {
  SensitivityBudget b = proto;
  b.gamma = gamma;
  b.gammabar = gammabar;
  spec.pair_count = sample.size();
  return reject(sample, b, spec).rejected;
}

}  // namespace detail

/// Largest gamma at which the conventional analysis (gammabar = gamma) still
/// rejects, by bracket growth and bisection to 1e-4. Returns 1 flagged when
/// there is no rejection under no unmeasured confounding.
inline SensitivityValue sensitivity_value(const PairedSample& sample,
                                          const SensitivityBudget& proto,
                                          UncertaintySetSpec spec,
                                          double gamma_max = 1e6) {
  spec.pair_count = sample.size();
  auto rejects = [&](double g) {
    return detail::decide(sample, proto, spec, g, g);
  };
  if (!rejects(1.0)) return {1.0, false};
  double lo = 1.0, hi = 2.0;
  while (rejects(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi >= gamma_max) return {gamma_max, true};
  }
  while (hi - lo > 1e-4) {
    double mid = 0.5 * (lo + hi);
    (rejects(mid) ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), true};
}

/// Rejection frontier in gammabar for each gamma on the grid. The frontier
/// traces the extended analysis on gammabar < gamma; the diagonal itself is
/// the conventional analysis and enters the curve through gamma_star, where
/// the rejection region touches the y = x line. Bracket endpoints are
/// verified before bisecting; a reversed bracket falls back to a grid scan.
inline SensitivityCurve sensitivity_curve(const PairedSample& sample,
                                          const SensitivityBudget& proto,
                                          UncertaintySetSpec spec,
                                          std::vector<double> gamma_grid = {},
                                          double gammabar_cap = 50.0,
                                          unsigned threads = 1) {
  if (gamma_grid.empty()) gamma_grid = default_gamma_grid();
  spec.pair_count = sample.size();
  SensitivityCurve curve;
  curve.gamma_star = sensitivity_value(sample, proto, spec).gamma_star;
  curve.points.resize(gamma_grid.size());

  auto frontier = [&](double gamma) {
    CurvePoint pt;
    pt.gamma = gamma;
    double hi = std::min(gamma, gammabar_cap);
    // stay on the extended branch: the diagonal switches estimators
    double hi_eval = hi >= gamma ? std::max(1.0, gamma * (1.0 - 1e-9)) : hi;
    bool lo_rejects = detail::decide(sample, proto, spec, gamma, 1.0);
    bool hi_rejects = detail::decide(sample, proto, spec, gamma, hi_eval);
    if (hi_rejects && lo_rejects) {
      pt.gammabar_star = hi;
      pt.saturated = true;
      return pt;
    }
    if (!lo_rejects && !hi_rejects) {
      pt.gammabar_star = 1.0;
      pt.no_reject = true;
      return pt;
    }
    if (!lo_rejects && hi_rejects) {
      // decision not monotone across the bracket; scan downward for the
      // lowest rejecting gammabar
      pt.scanned = true;
      double best = 1.0;
      for (double gb = hi_eval; gb >= 1.0; gb -= 1e-2)
        if (detail::decide(sample, proto, spec, gamma, gb)) best = gb;
      pt.gammabar_star = best;
      pt.no_reject = best == 1.0;
      return pt;
    }
    double lo = 1.0;
    double hi_b = hi_eval;
    while (hi_b - lo > 1e-4) {
      double mid = 0.5 * (lo + hi_b);
      (detail::decide(sample, proto, spec, gamma, mid) ? lo : hi_b) = mid;
    }
    pt.gammabar_star = 0.5 * (lo + hi_b);
    return pt;
  };

  parallel_for(gamma_grid.size(), threads,
               [&](std::size_t i) { curve.points[i] = frontier(gamma_grid[i]); });

  CurvePoint limit = frontier(kInf);
  curve.gammabar_limit = limit.gammabar_star;
  return curve;
}

struct TauBracket {
  double lo = 0.0;
  double hi = 0.0;
  bool provided = false;
};

/// Sensitivity interval: the smallest interval containing every tau whose
/// two-sided extended sensitivity analysis retains H_tau at level alpha.
/// Endpoints by bisection on tau (log scale for multiplicative hypotheses)
/// to 1e-6, rebuilding the scores at every candidate. The bracket widens
/// geometrically up to a cap before giving up on an endpoint.
inline SensitivityInterval sensitivity_interval(
    const std::vector<PairRecord>& data, StatisticKind stat,
    HypothesisKind hypothesis, const SensitivityBudget& proto,
    UncertaintySetSpec spec, TauBracket bracket = {}) {
  if (hypothesis == HypothesisKind::fisher_sharp)
    throw ValidationError("interval_hypothesis",
                          "interval inversion needs a tau-indexed hypothesis");
  if (data.empty()) throw ValidationError("empty_input", "no pairs");
  spec.pair_count = data.size();
  SensitivityBudget b = proto;
  b.side = Side::two_sided;

  const bool log_scale = hypothesis == HypothesisKind::multiplicative;
  auto rejects = [&](double theta) {
    double tau = log_scale ? std::exp(theta) : theta;
    HypothesisModel h = log_scale ? HypothesisModel::multiplicative(tau)
                                  : HypothesisModel::additive(tau);
    PairedSample s = build_scores(data, h, stat);
    return reject(s, b, spec).rejected;
  };

  // center the search on the effect estimate: mean difference of the
  // hypothesis-scale responses
  double center = 0.0, spread = 0.0;
  {
    std::vector<double> diffs;
    for (const auto& p : data) {
      double a = p.r[0], c = p.r[1];
      if (log_scale) {
        if (!(a > 0.0 && c > 0.0))
          throw ValidationError("nonpositive_response",
                                "multiplicative interval needs positive responses");
        a = std::log(a);
        c = std::log(c);
      }
      double treated = p.z[0] ? a : c;
      double control = p.z[0] ? c : a;
      diffs.push_back(treated - control);
    }
    center = std::accumulate(diffs.begin(), diffs.end(), 0.0) / diffs.size();
    for (double v : diffs) spread += (v - center) * (v - center);
    spread = std::sqrt(spread / diffs.size()) + 1e-3;
  }

  SensitivityInterval out;
  out.log_scale = log_scale;
  if (rejects(center)) {
    // acceptance set may still be nonempty off-center; coarse scan
    bool found = false;
    for (int k = 1; k <= 64 && !found; ++k) {
      for (double sgn : {-1.0, 1.0}) {
        double cand = center + sgn * k * 0.25 * spread;
        if (!rejects(cand)) {
          center = cand;
          found = true;
          break;
        }
      }
    }
    if (!found) {
      out.empty = true;
      out.lo = out.hi = center;
      return out;
    }
  }

  double blo = bracket.provided ? bracket.lo : center - 4.0 * spread;
  double bhi = bracket.provided ? bracket.hi : center + 4.0 * spread;

  auto endpoint = [&](double inner, double outer, bool upper) {
    // widen until the outer end rejects; give up loudly past the cap
    double width = std::max(std::fabs(outer - inner), spread);
    int tries = 0;
    while (!rejects(outer)) {
      width *= 2.0;
      outer = upper ? inner + width : inner - width;
      if (++tries > 60)
        throw NumericalError(
            "interval_bracket",
            "no rejection found while widening the tau bracket; the "
            "acceptance set appears unbounded",
            width);
    }
    double acc = inner, rej = outer;
    while (std::fabs(rej - acc) > 1e-6) {
      double mid = 0.5 * (acc + rej);
      (rejects(mid) ? rej : acc) = mid;
    }
    return 0.5 * (acc + rej);
  };

  out.lo = endpoint(center, blo, false);
  out.hi = endpoint(center, bhi, true);
  return out;
}

}  // namespace extsens
