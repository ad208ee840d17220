#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "extsens/error.hpp"
#include "extsens/math.hpp"

namespace extsens {

/// One matched pair: responses, treatment indicators (exactly one treated
/// unit), and optional per-unit covariates.
struct PairRecord {
  std::string pair_id;
  std::array<double, 2> r{0.0, 0.0};
  std::array<int, 2> z{1, 0};
  std::array<std::vector<double>, 2> x;  // subject-level covariates, may be empty

  void validate() const {
    if (z[0] + z[1] != 1)
      throw ValidationError("treatment_discordance",
                            "pair " + pair_id + ": need exactly one treated unit");
    if (!std::isfinite(r[0]) || !std::isfinite(r[1]))
      throw ValidationError("nonfinite_response",
                            "pair " + pair_id + ": responses must be finite");
    if (x[0].size() != x[1].size())
      throw ValidationError("covariate_shape",
                            "pair " + pair_id + ": covariate length mismatch");
  }
};

enum class HypothesisKind { fisher_sharp, additive, multiplicative };

/// Null hypothesis about unit-level treatment effects. The multiplicative
/// model stores log(tau) and acts on log responses.
struct HypothesisModel {
  HypothesisKind kind = HypothesisKind::fisher_sharp;
  double tau = 0.0;

  static HypothesisModel fisher() { return {HypothesisKind::fisher_sharp, 0.0}; }
  static HypothesisModel additive(double tau) {
    return {HypothesisKind::additive, tau};
  }
  static HypothesisModel multiplicative(double tau) {
    if (!(tau > 0.0))
      throw ValidationError("tau_domain", "multiplicative tau must be > 0");
    return {HypothesisKind::multiplicative, tau};
  }

  double log_tau() const { return std::log(tau); }
};

enum class StatisticKind { difference_in_means, wilcoxon_signed_rank, mcnemar };

enum class Side { greater, less, two_sided };

/// Pairs with their score vectors q and the observed sum statistic Z'q.
struct PairedSample {
  std::vector<PairRecord> pairs;
  std::vector<std::array<double, 2>> q;
  double t_obs = 0.0;

  std::size_t size() const { return pairs.size(); }

  double treated_score_sum() const {
    double t = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      t += pairs[i].z[0] ? q[i][0] : q[i][1];
    return t;
  }
};

/// Sample relabeled so q_i1 >= q_i2 within every pair, plus the gaps
/// d_i = q_i1 - q_i2 the optimization runs on.
struct OrientedSample {
  PairedSample sample;
  std::vector<double> gaps;
};

namespace detail {

inline std::vector<double> signed_rank_weights(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<std::size_t> nz;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] != 0.0) nz.push_back(i);
  std::sort(nz.begin(), nz.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(diffs[a]) < std::fabs(diffs[b]);
  });
  // Average ranks over tied |differences|; zero differences get weight 0.
  std::vector<double> w(n, 0.0);
  std::size_t i = 0;
  while (i < nz.size()) {
    std::size_t j = i;
    while (j + 1 < nz.size() &&
           std::fabs(diffs[nz[j + 1]]) == std::fabs(diffs[nz[i]]))
      ++j;
    double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) w[nz[k]] = avg;
    i = j + 1;
  }
  return w;
}

}  // namespace detail

/// Builds the score vectors q for a sum statistic Z'q under the hypothesis h.
///
/// difference_in_means uses q_ij = (f_ij - f_ij')/I where f is the response
/// transformed under h (identity, r - tau*z, or log r - log(tau)*z).
/// wilcoxon_signed_rank assigns the rank of |f_i1 - f_i2| to the higher unit.
/// mcnemar requires binary responses under the sharp null and uses q_ij = r_ij.
inline PairedSample build_scores(const std::vector<PairRecord>& data,
                                 const HypothesisModel& h, StatisticKind stat) {
  if (data.empty())
    throw ValidationError("empty_input", "need at least one pair");
  const std::size_t n = data.size();
  PairedSample s;
  s.pairs = data;
  s.q.assign(n, {0.0, 0.0});

  std::vector<std::array<double, 2>> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PairRecord& p = data[i];
    p.validate();
    for (int j = 0; j < 2; ++j) {
      switch (h.kind) {
        case HypothesisKind::fisher_sharp:
          f[i][j] = p.r[j];
          break;
        case HypothesisKind::additive:
          f[i][j] = p.r[j] - h.tau * p.z[j];
          break;
        case HypothesisKind::multiplicative:
          if (!(p.r[j] > 0.0))
            throw ValidationError(
                "nonpositive_response",
                "pair " + p.pair_id +
                    ": multiplicative hypothesis needs positive responses");
          f[i][j] = std::log(p.r[j]) - h.log_tau() * p.z[j];
          break;
      }
    }
  }

  switch (stat) {
    case StatisticKind::difference_in_means:
      for (std::size_t i = 0; i < n; ++i) {
        s.q[i][0] = (f[i][0] - f[i][1]) / static_cast<double>(n);
        s.q[i][1] = -s.q[i][0];
      }
      break;
    case StatisticKind::wilcoxon_signed_rank: {
      std::vector<double> diffs(n);
      for (std::size_t i = 0; i < n; ++i) diffs[i] = f[i][0] - f[i][1];
      std::vector<double> w = detail::signed_rank_weights(diffs);
      for (std::size_t i = 0; i < n; ++i) {
        if (diffs[i] > 0.0)
          s.q[i] = {w[i], 0.0};
        else if (diffs[i] < 0.0)
          s.q[i] = {0.0, w[i]};
        else
          s.q[i] = {0.0, 0.0};
      }
      break;
    }
    case StatisticKind::mcnemar:
      if (h.kind != HypothesisKind::fisher_sharp)
        throw ValidationError("mcnemar_hypothesis",
                              "mcnemar supports only the sharp null");
      for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
          if (data[i].r[j] != 0.0 && data[i].r[j] != 1.0)
            throw ValidationError("nonbinary_response",
                                  "pair " + data[i].pair_id +
                                      ": mcnemar needs 0/1 responses");
          s.q[i][j] = data[i].r[j];
        }
      }
      break;
  }

  s.t_obs = s.treated_score_sum();
  return s;
}

namespace detail {

/// Column-pivoted modified Gram-Schmidt basis of the column span of X
/// (row-major, m x k). Throws on rank deficiency, naming the columns that
/// failed the relative tolerance.
inline std::vector<std::vector<double>> orthonormal_basis(
    const std::vector<std::vector<double>>& cols, double rel_tol) {
  const std::size_t k = cols.size();
  std::vector<double> orig_norm(k);
  std::vector<std::vector<double>> work = cols;
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (double v : cols[j]) s += v * v;
    orig_norm[j] = std::sqrt(s);
  }
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };
  std::vector<std::vector<double>> basis;
  std::vector<bool> used(k, false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (used[j]) continue;
      double nrm = std::sqrt(dot(work[j], work[j]));
      if (nrm > best_norm) {
        best_norm = nrm;
        best = j;
      }
    }
    if (best == k || best_norm <= rel_tol * std::max(orig_norm[best], 1e-300)) {
      std::string offenders;
      for (std::size_t j = 0; j < k; ++j)
        if (!used[j]) offenders += (offenders.empty() ? "" : ",") + std::to_string(j);
      throw ValidationError("rank_deficient",
                            "covariate columns {" + offenders +
                                "} are linearly dependent or zero");
    }
    std::vector<double> e = work[best];
    for (double& v : e) v /= best_norm;
    // one reorthogonalization pass
    for (const auto& prev : basis) {
      double c = dot(e, prev);
      for (std::size_t r = 0; r < e.size(); ++r) e[r] -= c * prev[r];
    }
    double nrm = std::sqrt(dot(e, e));
    for (double& v : e) v /= nrm;
    used[best] = true;
    basis.push_back(e);
    for (std::size_t j = 0; j < k; ++j) {
      if (used[j]) continue;
      double c = dot(work[j], e);
      for (std::size_t r = 0; r < work[j].size(); ++r) work[j][r] -= c * e[r];
    }
  }
  return basis;
}

}  // namespace detail

/// Replaces q with (Id - H_X) q, the residual of the orthogonal projection
/// onto the column span of the 2I x k covariate matrix. No intercept column is
/// added. Rank decisions use a relative tolerance of 1e-10.
inline PairedSample adjust_scores(const PairedSample& sample,
                                  const std::vector<std::vector<double>>& x_rows) {
  const std::size_t n = sample.size();
  if (!x_rows.empty() && x_rows.size() != 2 * n)
    throw ValidationError("covariate_shape", "covariate matrix needs 2I rows");
  PairedSample out = sample;
  if (x_rows.empty() || x_rows.front().empty()) return out;

  const std::size_t k = x_rows.front().size();
  std::vector<std::vector<double>> cols(k, std::vector<double>(2 * n));
  for (std::size_t r = 0; r < 2 * n; ++r) {
    if (x_rows[r].size() != k)
      throw ValidationError("covariate_shape", "ragged covariate matrix");
    for (std::size_t j = 0; j < k; ++j) cols[j][r] = x_rows[r][j];
  }
  auto basis = detail::orthonormal_basis(cols, 1e-10);

  std::vector<double> qv(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    qv[2 * i] = sample.q[i][0];
    qv[2 * i + 1] = sample.q[i][1];
  }
  for (const auto& e : basis) {
    double c = std::inner_product(e.begin(), e.end(), qv.begin(), 0.0);
    for (std::size_t r = 0; r < 2 * n; ++r) qv[r] -= c * e[r];
  }
  for (std::size_t i = 0; i < n; ++i) out.q[i] = {qv[2 * i], qv[2 * i + 1]};
  out.t_obs = out.treated_score_sum();
  return out;
}

/// Per-unit covariate rows of a sample, pair-major.
inline std::vector<std::vector<double>> covariate_rows(const PairedSample& s) {
  std::vector<std::vector<double>> rows;
  rows.reserve(2 * s.size());
  for (const auto& p : s.pairs) {
    rows.push_back(p.x[0]);
    rows.push_back(p.x[1]);
  }
  return rows;
}

/// Relabels units so q_i1 >= q_i2 in every pair. For a less-than alternative
/// the scores (and t_obs) are negated first, reducing every test to the
/// greater-than case.
inline OrientedSample orient_for_alternative(const PairedSample& sample,
                                             Side side) {
  if (side == Side::two_sided)
    throw ValidationError("orientation_side",
                          "orient with the deviation side, not two_sided");
  if (sample.q.size() != sample.pairs.size())
    throw ValidationError("sample_shape", "one score pair per record required");
  OrientedSample out;
  out.sample = sample;
  if (side == Side::less) {
    for (auto& qi : out.sample.q) {
      qi[0] = -qi[0];
      qi[1] = -qi[1];
    }
    out.sample.t_obs = -out.sample.t_obs;
  }
  out.gaps.resize(sample.size());
  for (std::size_t i = 0; i < out.sample.size(); ++i) {
    auto& qi = out.sample.q[i];
    if (qi[0] < qi[1]) {
      std::swap(qi[0], qi[1]);
      auto& p = out.sample.pairs[i];
      std::swap(p.r[0], p.r[1]);
      std::swap(p.z[0], p.z[1]);
      std::swap(p.x[0], p.x[1]);
    }
    out.gaps[i] = qi[0] - qi[1];
  }
  return out;
}

}  // namespace extsens
