#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "extsens/error.hpp"
#include "extsens/math.hpp"

namespace extsens {

/// One unit of a calibration pair: treatment, outcome, the measured
/// confounder, and any adjusters entering the outcome model.
struct CalibrationUnit {
  int z = 0;
  double y = 0.0;
  double u = 0.0;
  std::vector<double> adjusters;
};

struct CalibrationRecord {
  std::string pair_id;
  std::array<CalibrationUnit, 2> units;

  void validate() const {
    if (units[0].z + units[1].z != 1)
      throw ValidationError("treatment_discordance",
                            "pair " + pair_id + ": need one treated unit");
    if (!std::isfinite(units[0].y) || !std::isfinite(units[1].y))
      throw ValidationError("nonfinite_response",
                            "pair " + pair_id + ": outcomes must be finite");
    if (units[0].adjusters.size() != units[1].adjusters.size())
      throw ValidationError("covariate_shape",
                            "pair " + pair_id + ": adjuster length mismatch");
  }
};

struct TreatmentFit {
  double beta_z = 0.0;
  bool flat = false;  // no within-pair confounder variation
};

struct OutcomeFit {
  std::vector<double> beta;  // adjusters..., confounder last
  double sigma2 = 0.0;
  bool exact_fit = false;  // zero residual, sigma2 degenerate
};

struct CalibrationFit {
  TreatmentFit treatment;
  OutcomeFit outcome;
  std::vector<double> pi_star;
  double gamma_hat = 1.0;
  double gammabar_hat = 1.0;
};

/// Conditional-likelihood estimate of the confounder's treatment coefficient.
/// Pair intercepts cancel under discordance, leaving a scalar concave
/// log-likelihood maximized by Newton steps to gradient tolerance 1e-10.
/// Separation (the treated unit always on one side of the confounder) leaves
/// the likelihood unbounded and is reported with its direction.
inline TreatmentFit fit_treatment_model(
    const std::vector<CalibrationRecord>& records) {
  if (records.empty()) throw ValidationError("empty_input", "no pairs");
  std::vector<double> du;  // treated minus control confounder gap
  for (const auto& rec : records) {
    rec.validate();
    int t = rec.units[0].z == 1 ? 0 : 1;
    du.push_back(rec.units[t].u - rec.units[1 - t].u);
  }
  bool any_pos = false, any_neg = false;
  for (double v : du) {
    any_pos |= v > 0.0;
    any_neg |= v < 0.0;
  }
  if (!any_pos && !any_neg) return {0.0, true};
  if (!any_neg)
    throw ValidationError("separation",
                          "treated unit always has the larger confounder; "
                          "likelihood increases without bound");
  if (!any_pos)
    throw ValidationError("separation",
                          "treated unit always has the smaller confounder; "
                          "likelihood decreases without bound");

  double beta = 0.0;
  for (int it = 0; it < 200; ++it) {
    double grad = 0.0, hess = 0.0;
    for (double v : du) {
      double e = 1.0 / (1.0 + std::exp(-beta * v));
      grad += v * (1.0 - e);
      hess -= v * v * e * (1.0 - e);
    }
    if (std::fabs(grad) <= 1e-10) return {beta, false};
    double step = -grad / hess;
    // damp giant steps far from the optimum
    step = std::clamp(step, -10.0, 10.0);
    beta += step;
  }
  throw NumericalError("newton_stall",
                       "conditional likelihood did not converge", 0.0);
}

namespace detail {

/// Dense least squares on small systems via normal equations with partial
/// pivoting; throws on singularity.
inline std::vector<double> solve_least_squares(
    const std::vector<std::vector<double>>& rows,
    const std::vector<double>& target) {
  const std::size_t k = rows.front().size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] += rows[r][i] * rows[r][j];
      a[i][k] += rows[r][i] * target[r];
    }
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-12)
      throw ValidationError("rank_deficient",
                            "within-pair design is rank deficient at column " +
                                std::to_string(col));
    std::swap(a[piv], a[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> beta(k);
  for (std::size_t i = 0; i < k; ++i) beta[i] = a[i][k] / a[i][i];
  return beta;
}

}  // namespace detail

/// Within-pair differenced least squares for the Gaussian outcome model; the
/// pair intercepts drop out of the differences. Regressors are the adjusters
/// followed by the confounder. Unit-level errors have variance sigma^2, so
/// differences have 2 sigma^2 and sigma2 = RSS / (2 (I - k)).
inline OutcomeFit fit_outcome_model(
    const std::vector<CalibrationRecord>& records) {
  if (records.empty()) throw ValidationError("empty_input", "no pairs");
  const std::size_t k = records.front().units[0].adjusters.size() + 1;
  if (records.size() <= k)
    throw ValidationError("insufficient_pairs",
                          "need more pairs than slope coefficients");
  std::vector<std::vector<double>> dx;
  std::vector<double> dy;
  for (const auto& rec : records) {
    rec.validate();
    std::vector<double> row;
    for (std::size_t j = 0; j + 1 < k; ++j)
      row.push_back(rec.units[0].adjusters[j] - rec.units[1].adjusters[j]);
    row.push_back(rec.units[0].u - rec.units[1].u);
    dx.push_back(row);
    dy.push_back(rec.units[0].y - rec.units[1].y);
  }
  OutcomeFit fit;
  fit.beta = detail::solve_least_squares(dx, dy);
  double rss = 0.0;
  for (std::size_t r = 0; r < dx.size(); ++r) {
    double pred = std::inner_product(fit.beta.begin(), fit.beta.end(),
                                     dx[r].begin(), 0.0);
    rss += (dy[r] - pred) * (dy[r] - pred);
  }
  fit.sigma2 = rss / (2.0 * static_cast<double>(records.size() - k));
  fit.exact_fit = rss <= 1e-24;
  return fit;
}

/// Probability that the unit with the higher outcome is the treated one in
/// pair i, given the fitted treatment and outcome models and the confounder
/// gap. The orientation flips when the fitted effects disagree in sign.
inline std::vector<double> pairwise_bias(
    const TreatmentFit& tfit, const OutcomeFit& ofit,
    const std::vector<CalibrationRecord>& records) {
  if (!(ofit.sigma2 > 0.0))
    throw ValidationError("sigma_zero",
                          "outcome model fits exactly; bias display undefined");
  const double beta_u = ofit.beta.back();
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    double du = rec.units[0].u - rec.units[1].u;
    double ylo = std::min(rec.units[0].y, rec.units[1].y);
    double yhi = std::max(rec.units[0].y, rec.units[1].y);
    double a = tfit.beta_z * du;
    double b = (beta_u / ofit.sigma2) * (yhi - ylo) * du;
    double pi = (std::exp(a) * std::exp(b) + 1.0) /
                ((1.0 + std::exp(a)) * (1.0 + std::exp(b)));
    if (tfit.beta_z * beta_u < 0.0) pi = 1.0 - pi;
    out.push_back(pi);
  }
  return out;
}

struct GammaEstimates {
  double gamma_hat = 1.0;
  double gammabar_hat = 1.0;
  bool unbounded = false;  // some pi* reached 1
};

/// Odds transform of the largest and average estimated bias:
/// gamma = pi/(1 - pi) inverts the cap map gamma/(1+gamma).
inline GammaEstimates estimate_gammas(const std::vector<double>& pi_star) {
  if (pi_star.empty()) throw ValidationError("empty_input", "no pairs");
  double mx = 0.0, mean = 0.0;
  for (double p : pi_star) {
    if (!(p >= 0.5) || p > 1.0)
      throw ValidationError("pi_domain", "pi* must lie in [1/2, 1]");
    mx = std::max(mx, p);
    mean += p;
  }
  mean /= static_cast<double>(pi_star.size());
  GammaEstimates g;
  g.unbounded = mx >= 1.0;
  g.gamma_hat = g.unbounded ? kInf : mx / (1.0 - mx);
  g.gammabar_hat = mean >= 1.0 ? kInf : mean / (1.0 - mean);
  return g;
}

/// Per-pair increase in bias over an identical-confounder pair, as an odds
/// ratio against pi* = 1/2.
inline std::vector<double> bias_odds_ratios(const std::vector<double>& pi_star) {
  std::vector<double> out;
  out.reserve(pi_star.size());
  for (double p : pi_star)
    out.push_back(p >= 1.0 ? kInf : p / (1.0 - p));
  return out;
}

/// Full calibration pipeline: treatment model, outcome model, per-pair bias,
/// and the (gamma, gammabar) estimates.
inline CalibrationFit calibrate(const std::vector<CalibrationRecord>& records) {
  CalibrationFit fit;
  fit.treatment = fit_treatment_model(records);
  fit.outcome = fit_outcome_model(records);
  fit.pi_star = pairwise_bias(fit.treatment, fit.outcome, records);
  GammaEstimates g = estimate_gammas(fit.pi_star);
  fit.gamma_hat = g.gamma_hat;
  fit.gammabar_hat = g.gammabar_hat;
  return fit;
}

}  // namespace extsens
