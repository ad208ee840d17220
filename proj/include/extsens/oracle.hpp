#pragma once

#include <cstdint>
#include <vector>

#include "extsens/error.hpp"
#include "extsens/qp.hpp"

namespace extsens {
namespace oracle {

struct EnumerationLimit {
  std::size_t max_pairs = 16;
};

/// Exact tail probability P(Z'q >= a) by summing all 2^I treatment
/// assignments, with pi_i the probability that the first unit of pair i is
/// treated. Gray-code order keeps each step O(1), but every assignment is
/// visited.
inline double exact_tail(const PairedSample& sample,
                         const std::vector<double>& pi, double a,
                         EnumerationLimit limit = {}) {
  const std::size_t n = sample.size();
  if (n > limit.max_pairs)
    throw ValidationError("enumeration_limit",
                          "exact enumeration refused above max_pairs");
  if (pi.size() != n)
    throw ValidationError("pi_shape", "need one probability per pair");
  for (double p : pi)
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError("pi_domain", "probabilities must lie in [0,1]");

  // Start with every second unit treated. Zero factors are tracked outside
  // the running product so the multiplicative updates stay well-defined; the
  // product is rebuilt from scratch periodically to cap drift, and the tail
  // is Kahan-summed in extended precision.
  double t = 0.0;
  std::size_t zero_factors = 0;
  std::vector<int> first_treated(n, 0);
  auto rebuild = [&]() {
    long double p = 1.0L;
    zero_factors = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double f = first_treated[i] ? pi[i] : 1.0 - pi[i];
      if (f == 0.0)
        ++zero_factors;
      else
        p *= f;
    }
    return p;
  };
  for (std::size_t i = 0; i < n; ++i) t += sample.q[i][1];
  long double prob = rebuild();

  long double total = 0.0L, comp = 0.0L;
  auto accumulate = [&]() {
    if (zero_factors == 0 && t >= a) {
      long double y = prob - comp;
      long double s = total + y;
      comp = (s - total) - y;
      total = s;
    }
  };
  accumulate();

  const std::uint64_t count = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < count; ++k) {
    std::uint64_t next_gray = k ^ (k >> 1);
    std::uint64_t flip = gray ^ next_gray;
    gray = next_gray;
    std::size_t i = 0;
    while (!((flip >> i) & 1ull)) ++i;
    if (first_treated[i]) {
      // unit 1 -> unit 2
      t += sample.q[i][1] - sample.q[i][0];
      first_treated[i] = 0;
      if (pi[i] == 0.0)
        --zero_factors;
      else
        prob /= pi[i];
      if (1.0 - pi[i] == 0.0)
        ++zero_factors;
      else
        prob *= (1.0L - pi[i]);
    } else {
      t += sample.q[i][0] - sample.q[i][1];
      first_treated[i] = 1;
      if (1.0 - pi[i] == 0.0)
        --zero_factors;
      else
        prob /= (1.0L - pi[i]);
      if (pi[i] == 0.0)
        ++zero_factors;
      else
        prob *= pi[i];
    }
    if ((k & 0xFFFu) == 0) prob = rebuild();
    accumulate();
  }
  return static_cast<double>(total);
}

struct GridSearchResult {
  std::vector<double> pi;
  double objective = 0.0;
  std::uint64_t evaluated = 0;
};

/// Exhaustive minimization of zeta over the discretized box intersected with
/// the budget constraint. The grid runs from 1/2 in steps of `step` and always
/// includes the upper cap. Validation oracle for minimize_zeta; refuses more
/// than 10 pairs.
inline GridSearchResult grid_search_min_deviate(const OrientedSample& oriented,
                                                const SensitivityBudget& budget,
                                                const UncertaintySetSpec& spec,
                                                double step) {
  if (oriented.sample.size() > 10)
    throw ValidationError("grid_limit", "grid search refused above 10 pairs");
  if (!(step > 0.0 && step <= 0.05))
    throw ValidationError("grid_step", "step must lie in (0, 0.05]");
  QpProblem prob = assemble(oriented, budget, spec);
  const std::size_t n = prob.size();

  std::vector<double> levels;
  for (double v = prob.lower; v < prob.upper - 1e-12; v += step)
    levels.push_back(v);
  levels.push_back(prob.upper);

  GridSearchResult best;
  best.pi.assign(n, prob.lower);
  best.objective = kInf;

  std::vector<double> x(n, prob.lower);
  const double A = prob.gap_offset();
  std::uint64_t guard = 0;
  // depth-first with budget pruning: remaining coordinates sit at the lower
  // bound in the best case
  std::function<void(std::size_t, double, double, double)> recurse =
      [&](std::size_t i, double sum_x, double sum_dx, double sum_var) {
        if (sum_x + prob.lower * static_cast<double>(n - i) >
            prob.budget_rhs + 1e-12)
          return;
        if (i == n) {
          ++best.evaluated;
          if (++guard > (std::uint64_t{1} << 40))
            throw NumericalError("grid_overflow", "grid search too large");
          double e = A - sum_dx;
          double obj = e * e - prob.crit * sum_var;
          if (obj < best.objective) {
            best.objective = obj;
            best.pi = x;
          }
          return;
        }
        for (double v : levels) {
          x[i] = v;
          recurse(i + 1, sum_x + v, sum_dx + prob.d[i] * v,
                  sum_var + prob.d[i] * prob.d[i] * v * (1.0 - v));
        }
      };
  recurse(0, 0.0, 0.0, 0.0);
  return best;
}

}  // namespace oracle
}  // namespace extsens
