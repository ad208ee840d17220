#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "extsens/error.hpp"
#include "extsens/math.hpp"
#include "extsens/paired_data.hpp"
#include "extsens/qp.hpp"
#include "extsens/uncertainty.hpp"

namespace extsens {

/// Binary-outcome study reduced to McNemar form: I_d outcome-discordant
/// pairs, I_c concordant pairs, and the count of discordant pairs whose
/// treated unit has the positive outcome.
struct McNemarSummary {
  std::size_t discordant = 0;  // I_d
  std::size_t concordant = 0;  // I_c
  std::size_t t_obs = 0;       // 0 <= t_obs <= I_d

  std::size_t total() const { return discordant + concordant; }

  void validate() const {
    if (t_obs > discordant)
      throw ValidationError("mcnemar_tobs", "t_obs cannot exceed I_d");
  }
};

/// Classifies binary-outcome pairs. Pairs concordant in outcome never move
/// the statistic, whatever their treatment pattern.
inline McNemarSummary summarize_mcnemar(const std::vector<PairRecord>& data) {
  McNemarSummary s;
  for (const auto& p : data) {
    p.validate();
    for (int j = 0; j < 2; ++j)
      if (p.r[j] != 0.0 && p.r[j] != 1.0)
        throw ValidationError("nonbinary_response",
                              "pair " + p.pair_id + ": mcnemar needs 0/1");
    if (p.r[0] != p.r[1]) {
      ++s.discordant;
      int pos = p.r[0] == 1.0 ? 0 : 1;
      if (p.z[pos] == 1) ++s.t_obs;
    } else {
      ++s.concordant;
    }
  }
  return s;
}

struct McNemarResult {
  double p_beta = 1.0;
  double pi_d = 0.5;           // binomial success bound on discordant pairs
  bool conventional_path = false;
  bool qp_fallback = false;
  std::vector<std::string> warnings;
};

namespace detail {

/// Worst-case discordant-pair probability under the budget: concordant pairs
/// sit at 1/2 and the remaining mean mass concentrates on discordant pairs,
/// capped by gamma/(1+gamma).
inline double discordant_bound(const McNemarSummary& s,
                               const SensitivityBudget& budget,
                               UncertaintySetSpec spec) {
  spec.pair_count = s.total();
  const double cap = gamma_to_prob(budget.gamma);
  double pi_m = maximize_mean_bound(spec, budget).bound;
  double raw = (static_cast<double>(s.total()) * pi_m -
                0.5 * static_cast<double>(s.concordant)) /
               static_cast<double>(s.discordant);
  return std::min(raw, cap);
}

/// Score-equivalent paired sample for the QP fallback: discordant pairs carry
/// q = (1, 0), concordant pairs q = (0, 0).
inline PairedSample mcnemar_equivalent_sample(const McNemarSummary& s) {
  PairedSample out;
  std::size_t n = s.total();
  out.pairs.resize(n);
  out.q.assign(n, {0.0, 0.0});
  for (std::size_t i = 0; i < s.discordant; ++i) {
    out.q[i] = {1.0, 0.0};
    out.pairs[i].r = {1.0, 0.0};
    bool treated_first = i < s.t_obs;
    out.pairs[i].z = treated_first ? std::array<int, 2>{1, 0}
                                   : std::array<int, 2>{0, 1};
    out.pairs[i].pair_id = "d" + std::to_string(i);
  }
  for (std::size_t i = s.discordant; i < n; ++i) {
    out.pairs[i].r = {0.0, 0.0};
    out.pairs[i].pair_id = "c" + std::to_string(i - s.discordant);
  }
  out.t_obs = static_cast<double>(s.t_obs);
  return out;
}

}  // namespace detail

/// Exact extended sensitivity p-value for McNemar's statistic: a binomial
/// tail over the discordant pairs at the worst-case probability, plus beta
/// when gammabar < gamma in the superpopulation frame. Valid at every I with
/// a distribution-free uncertainty set; the CLT set only carries asymptotic
/// guarantees and is flagged. When the optimality condition
/// t_obs >= I_d * pi_d fails, the quadratic-program path takes over.
inline McNemarResult mcnemar_pvalue(const McNemarSummary& summary,
                                    const SensitivityBudget& budget,
                                    const UncertaintySetSpec& spec) {
  summary.validate();
  budget.validate();
  McNemarResult out;
  if (summary.discordant == 0) {
    out.warnings.push_back("degenerate: no discordant pairs, p = 1");
    return out;
  }
  if (spec.kind == UncertaintyKind::clt)
    out.warnings.push_back(
        "clt_set: finite-sample exactness needs hoeffding, bennett, or the "
        "sample frame");

  const double cap = gamma_to_prob(budget.gamma);
  const int n_d = static_cast<int>(summary.discordant);
  const int t = static_cast<int>(summary.t_obs);

  if (budget.gammabar == budget.gamma) {
    out.conventional_path = true;
    out.pi_d = cap;
    out.p_beta = binomial_upper_tail(n_d, cap, t);
    return out;
  }

  out.pi_d = detail::discordant_bound(summary, budget, spec);
  if (static_cast<double>(t) <
      static_cast<double>(n_d) * out.pi_d - 1e-12) {
    out.qp_fallback = true;
    out.warnings.push_back(
        "prop2_optimality_failed: t_obs < I_d * pi_d, using the "
        "quadratic-program bound instead");
    PairedSample equiv = detail::mcnemar_equivalent_sample(summary);
    UncertaintySetSpec full = spec;
    full.pair_count = equiv.size();
    out.p_beta = worst_case_pvalue(equiv, budget, full);
    return out;
  }

  out.p_beta = std::min(
      1.0, binomial_upper_tail(n_d, out.pi_d, t) + budget.effective_beta());
  return out;
}

/// Smallest gammabar at which the discordant-pair bound saturates at
/// gamma/(1+gamma) — beyond it the extended analysis pays beta for nothing
/// and the conventional analysis weakly dominates. Monotone bisection to
/// 1e-8 (probability scale 1e-12 when gamma is infinite).
inline double crossover_gammabar(std::size_t discordant, std::size_t concordant,
                                 const SensitivityBudget& budget,
                                 const UncertaintySetSpec& spec) {
  if (discordant == 0)
    throw ValidationError("mcnemar_degenerate", "need at least one discordant pair");
  McNemarSummary s{discordant, concordant, 0};
  const double cap = gamma_to_prob(budget.gamma);
  auto saturated = [&](double gammabar) {
    SensitivityBudget b = budget;
    b.gammabar = gammabar;
    return detail::discordant_bound(s, b, spec) >= cap - 1e-12;
  };
  if (budget.gamma == 1.0 || saturated(1.0)) return 1.0;

  if (std::isinf(budget.gamma)) {
    // bisect on the probability scale gammabar/(1+gammabar)
    double lo = 0.5, hi = 1.0 - 1e-12;
    auto odds = [](double u) { return u / (1.0 - u); };
    if (!saturated(odds(hi))) return kInf;
    while (hi - lo > 1e-12) {
      double mid = 0.5 * (lo + hi);
      if (saturated(odds(mid)))
        hi = mid;
      else
        lo = mid;
    }
    return odds(hi);
  }

  double lo = 1.0, hi = budget.gamma;
  while (hi - lo > 1e-8) {
    double mid = 0.5 * (lo + hi);
    if (saturated(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace extsens
