#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "extsens/error.hpp"
#include "extsens/parallel.hpp"
#include "extsens/qp.hpp"
#include "extsens/rng.hpp"

namespace extsens {

enum class OutcomeModel { unbiased, biased };

/// One Monte Carlo design cell: pairs are drawn from the two-point treatment
/// mixture calibrated so E[Pi*] = gammabar/(1+gammabar), with outcomes either
/// independent of the assignment (unbiased) or adversely tied to it (biased).
struct SimDesign {
  std::size_t pairs = 100;
  std::size_t replicates = 5000;
  double tau = 0.0;
  double gamma_true = 1.0;
  double gammabar_true = 1.0;
  OutcomeModel outcome = OutcomeModel::unbiased;
  double alpha = 0.05;
  double beta = 0.005;
  std::uint64_t seed = 0;

  void validate() const {
    if (pairs == 0 || replicates == 0)
      throw ValidationError("sim_size", "need pairs >= 1 and replicates >= 1");
    if (!std::isfinite(gamma_true) || !(gamma_true >= 1.0) ||
        !(gammabar_true >= 1.0) || gammabar_true > gamma_true)
      throw ValidationError("sim_gammas",
                            "need finite 1 <= gammabar_true <= gamma_true");
  }
};

/// P(Pi* = 1/2) in the treatment mixture; the complementary mass sits at
/// gamma/(1+gamma) so that E[Pi*] hits the gammabar cap exactly. The 0/0
/// case at gamma = gammabar = 1 is 0 by convention.
inline double mixture_weight(double gamma_true, double gammabar_true) {
  if (gamma_true == 1.0) return 0.0;
  return 2.0 * (gamma_true - gammabar_true) /
         ((gamma_true - 1.0) * (gammabar_true + 1.0));
}

/// Draws one replicate. Per pair: the maximal probability Pi*, a random
/// orientation, the assignment, and a standard normal error, in that fixed
/// order. Responses are stored as (Y_i, 0) with the paired difference equal
/// to tau + eps (unbiased) or tau +/- |eps| with + exactly when the
/// higher-probability unit was treated (biased).
inline PairedSample draw_replicate(const SimDesign& design, Rng& rng) {
  design.validate();
  const double p_half = mixture_weight(design.gamma_true, design.gammabar_true);
  const double cap = gamma_to_prob(design.gamma_true);
  std::vector<PairRecord> records(design.pairs);
  for (std::size_t i = 0; i < design.pairs; ++i) {
    double pi_star = rng.bernoulli(p_half) ? 0.5 : cap;
    double pi = rng.bernoulli(0.5) ? pi_star : 1.0 - pi_star;
    int z1 = rng.bernoulli(pi) ? 1 : 0;
    double eps = rng.normal();
    double y;
    if (design.outcome == OutcomeModel::unbiased) {
      y = design.tau * (z1 ? 1.0 : -1.0) + eps;
    } else {
      double sign = pi > 1.0 - pi ? 1.0 : -1.0;
      y = design.tau * (z1 ? 1.0 : -1.0) + sign * std::fabs(eps);
    }
    records[i].pair_id = "s" + std::to_string(i);
    records[i].r = {y, 0.0};
    records[i].z = z1 ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
  }
  return build_scores(records, HypothesisModel::fisher(),
                      StatisticKind::difference_in_means);
}

struct SimTable {
  std::vector<double> gammas;     // column labels
  std::vector<double> gammabars;  // row labels
  // rates[row][col]; NaN marks infeasible cells with gammabar > gamma
  std::vector<std::vector<double>> rates;
};

/// Rejection rate of the extended analysis of H0: tau = 0 over a
/// (gamma, gammabar) grid, each cell simulated at its own parameters.
/// Follows the published protocol: a two-sided test run through the
/// quadratic program at every cell, the diagonal included. Replicate streams
/// are keyed by (seed, cell, replicate), so the table is bitwise reproducible
/// for any thread count.
inline SimTable run_table(const SimDesign& proto,
                          const std::vector<double>& gammas,
                          const std::vector<double>& gammabars,
                          UncertaintyKind kind = UncertaintyKind::clt,
                          unsigned threads = 1) {
  proto.validate();
  SimTable table;
  table.gammas = gammas;
  table.gammabars = gammabars;
  table.rates.assign(gammabars.size(),
                     std::vector<double>(gammas.size(),
                                         std::numeric_limits<double>::quiet_NaN()));

  struct Cell {
    std::size_t row, col;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < gammabars.size(); ++r)
    for (std::size_t c = 0; c < gammas.size(); ++c)
      if (gammabars[r] <= gammas[c]) cells.push_back({r, c});

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const auto [row, col] = cells[ci];
    SimDesign design = proto;
    design.gamma_true = gammas[col];
    design.gammabar_true = gammabars[row];

    SensitivityBudget budget;
    budget.gamma = design.gamma_true;
    budget.gammabar = design.gammabar_true;
    budget.alpha = design.alpha;
    budget.beta = design.beta;
    budget.side = Side::two_sided;
    UncertaintySetSpec spec{kind, design.pairs};

    std::vector<char> rejected(design.replicates, 0);
    parallel_for(design.replicates, threads, [&](std::size_t rep) {
      Rng rng(design.seed, ci, rep);
      PairedSample sample = draw_replicate(design, rng);
      rejected[rep] = reject_qp_protocol(sample, budget, spec).rejected ? 1 : 0;
    });
    std::size_t hits = 0;
    for (char v : rejected) hits += v;
    table.rates[row][col] =
        static_cast<double>(hits) / static_cast<double>(design.replicates);
  }
  return table;
}

}  // namespace extsens
