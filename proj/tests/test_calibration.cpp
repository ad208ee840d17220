#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "extsens/calibration.hpp"
#include "extsens/rng.hpp"

using namespace extsens;

namespace {

CalibrationRecord make_record(const std::string& id, int z1, double y1,
                              double y2, double u1, double u2,
                              std::vector<double> a1 = {},
                              std::vector<double> a2 = {}) {
  CalibrationRecord r;
  r.pair_id = id;
  r.units[0] = {z1, y1, u1, a1};
  r.units[1] = {1 - z1, y2, u2, a2};
  return r;
}

/// Synthetic calibration study with known coefficients.
std::vector<CalibrationRecord> synthetic(std::size_t n, double beta_z,
                                         double beta_age, double beta_u,
                                         double sigma, Rng& rng) {
  std::vector<CalibrationRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    double u1 = 100.0 + 15.0 * rng.normal(), u2 = 100.0 + 15.0 * rng.normal();
    double age1 = 30.0 + 5.0 * rng.normal(), age2 = 30.0 + 5.0 * rng.normal();
    // conditional-logit assignment within the pair
    double p1 = 1.0 / (1.0 + std::exp(-beta_z * (u1 - u2)));
    int z1 = rng.bernoulli(p1) ? 1 : 0;
    double alpha_pair = rng.normal();  // pair intercept, must drop out
    double y1 = alpha_pair + beta_age * age1 + beta_u * u1 + sigma * rng.normal();
    double y2 = alpha_pair + beta_age * age2 + beta_u * u2 + sigma * rng.normal();
    out.push_back(make_record("c" + std::to_string(i), z1, y1, y2, u1, u2,
                              {age1}, {age2}));
  }
  return out;
}

}  // namespace

TEST_CASE("treatment model edge cases", "[calibration]") {
  SECTION("no confounder variation is flat") {
    std::vector<CalibrationRecord> recs = {
        make_record("a", 1, 1.0, 2.0, 5.0, 5.0),
        make_record("b", 0, 2.0, 1.0, 3.0, 3.0)};
    TreatmentFit fit = fit_treatment_model(recs);
    CHECK(fit.flat);
    CHECK(fit.beta_z == 0.0);
  }
  SECTION("separation is refused") {
    std::vector<CalibrationRecord> recs = {
        make_record("a", 1, 1.0, 2.0, 9.0, 5.0),
        make_record("b", 0, 2.0, 1.0, 3.0, 8.0)};
    // treated unit always has the larger confounder
    CHECK_THROWS_WITH(fit_treatment_model(recs),
                      Catch::Matchers::ContainsSubstring("separation"));
  }
}

TEST_CASE("treatment model is consistent on synthetic data",
          "[calibration][slow]") {
  Rng rng(404, 0, 0);
  auto recs = synthetic(10000, 0.1, 0.0, 0.0, 1.0, rng);
  TreatmentFit fit = fit_treatment_model(recs);
  // asymptotic SE of the conditional MLE ~ 1/sqrt(sum du^2 e(1-e))
  double info = 0.0;
  for (const auto& r : recs) {
    double du = r.units[0].u - r.units[1].u;
    double e = 1.0 / (1.0 + std::exp(-fit.beta_z * du));
    info += du * du * e * (1.0 - e);
  }
  double se = 1.0 / std::sqrt(info);
  CHECK(std::fabs(fit.beta_z - 0.1) <= 3.0 * se);

  // score equation solved to tolerance
  double grad = 0.0;
  for (const auto& r : recs) {
    int t = r.units[0].z == 1 ? 0 : 1;
    double du = r.units[t].u - r.units[1 - t].u;
    grad += du * (1.0 - 1.0 / (1.0 + std::exp(-fit.beta_z * du)));
  }
  CHECK(std::fabs(grad) <= 1e-10);
}

TEST_CASE("outcome model", "[calibration]") {
  SECTION("exact fit flags sigma2 = 0") {
    std::vector<CalibrationRecord> recs;
    for (int i = 0; i < 6; ++i) {
      double u1 = i, u2 = 2.0 * i + 1.0;
      double a1 = 3.0 + i, a2 = 1.0 + 2.0 * i;
      // exactly linear: y = 2*age + 0.5*u (+ pair intercept i)
      recs.push_back(make_record("e" + std::to_string(i), i % 2,
                                 i + 2.0 * a1 + 0.5 * u1, i + 2.0 * a2 + 0.5 * u2,
                                 u1, u2, {a1}, {a2}));
    }
    OutcomeFit fit = fit_outcome_model(recs);
    CHECK(fit.exact_fit);
    CHECK(fit.sigma2 == Catch::Approx(0.0).margin(1e-18));
    CHECK(fit.beta[0] == Catch::Approx(2.0).margin(1e-9));
    CHECK(fit.beta[1] == Catch::Approx(0.5).margin(1e-9));
    CHECK_THROWS_AS(pairwise_bias({0.1, false}, fit, recs), ValidationError);
  }

  SECTION("pair-level shifts drop out") {
    Rng rng(11, 0, 0);
    auto recs = synthetic(200, 0.05, 1.5, 0.02, 0.8, rng);
    OutcomeFit base = fit_outcome_model(recs);
    auto shifted = recs;
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      shifted[i].units[0].y += 100.0 + static_cast<double>(i);
      shifted[i].units[1].y += 100.0 + static_cast<double>(i);
    }
    OutcomeFit moved = fit_outcome_model(shifted);
    CHECK(moved.beta[0] == Catch::Approx(base.beta[0]).margin(1e-9));
    CHECK(moved.beta[1] == Catch::Approx(base.beta[1]).margin(1e-9));
    CHECK(moved.sigma2 == Catch::Approx(base.sigma2).margin(1e-9));
  }

  SECTION("pure noise gives coefficients near zero") {
    Rng rng(12, 0, 0);
    auto recs = synthetic(10000, 0.0, 0.0, 0.0, 1.0, rng);
    OutcomeFit fit = fit_outcome_model(recs);
    // crude 3-SE bound: differenced regressor scale ~ 15*sqrt(2), noise sqrt(2)
    CHECK(std::fabs(fit.beta[1]) <= 3.0 / (15.0 * std::sqrt(10000.0)) * 1.5);
    CHECK(fit.sigma2 == Catch::Approx(1.0).margin(0.05));
  }

  SECTION("matches full fixed-effects least squares") {
    Rng rng(13, 0, 0);
    auto recs = synthetic(25, 0.05, 1.2, 0.03, 0.7, rng);
    OutcomeFit diff = fit_outcome_model(recs);
    // explicit fixed-effects system: one intercept per pair + 2 slopes
    const std::size_t I = recs.size(), k = 2;
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (std::size_t i = 0; i < I; ++i) {
      for (int u = 0; u < 2; ++u) {
        std::vector<double> row(I + k, 0.0);
        row[i] = 1.0;
        row[I] = recs[i].units[u].adjusters[0];
        row[I + 1] = recs[i].units[u].u;
        rows.push_back(row);
        y.push_back(recs[i].units[u].y);
      }
    }
    auto beta = detail::solve_least_squares(rows, y);
    CHECK(diff.beta[0] == Catch::Approx(beta[I]).margin(1e-8));
    CHECK(diff.beta[1] == Catch::Approx(beta[I + 1]).margin(1e-8));
  }
}

TEST_CASE("pairwise bias display", "[calibration]") {
  OutcomeFit ofit;
  ofit.beta = {0.5, 0.2};
  ofit.sigma2 = 1.0;
  TreatmentFit tfit{0.3, false};

  SECTION("equal confounders give one half") {
    auto recs = std::vector<CalibrationRecord>{
        make_record("a", 1, 2.0, 1.0, 4.0, 4.0, {0.0}, {0.0})};
    auto pi = pairwise_bias(tfit, ofit, recs);
    CHECK(pi[0] == Catch::Approx(0.5).margin(1e-14));
  }
  SECTION("zero coefficients give one half") {
    auto recs = std::vector<CalibrationRecord>{
        make_record("a", 1, 2.0, 1.0, 9.0, 4.0, {0.0}, {0.0})};
    OutcomeFit zero = ofit;
    zero.beta = {0.5, 0.0};
    auto pi = pairwise_bias({0.0, true}, zero, recs);
    CHECK(pi[0] == Catch::Approx(0.5).margin(1e-14));
  }
  SECTION("pi is at least one half and flips with one factor's sign") {
    auto recs = std::vector<CalibrationRecord>{
        make_record("a", 1, 2.5, 1.0, 9.0, 4.0, {0.0}, {0.0}),
        make_record("b", 0, 0.5, 3.0, 2.0, 7.5, {0.0}, {0.0})};
    auto pi = pairwise_bias(tfit, ofit, recs);
    for (double p : pi) CHECK(p >= 0.5);
    // flipping the treatment coefficient alone maps pi to 1 - pi before the
    // orientation step; after orientation both stay >= 1/2 and agree
    TreatmentFit flipped{-tfit.beta_z, false};
    auto pi_flip = pairwise_bias(flipped, ofit, recs);
    for (std::size_t i = 0; i < pi.size(); ++i)
      CHECK(pi_flip[i] == Catch::Approx(pi[i]).margin(1e-12));
  }
}

TEST_CASE("gamma estimates use the odds transform", "[calibration]") {
  auto g = estimate_gammas({0.5, 0.9});
  CHECK(g.gamma_hat == Catch::Approx(9.0).epsilon(1e-12));
  CHECK(g.gammabar_hat == Catch::Approx(0.7 / 0.3).epsilon(1e-12));

  auto flat = estimate_gammas({0.5, 0.5, 0.5});
  CHECK(flat.gamma_hat == 1.0);
  CHECK(flat.gammabar_hat == 1.0);

  auto top = estimate_gammas({0.5, 1.0});
  CHECK(top.unbounded);
  CHECK(std::isinf(top.gamma_hat));

  // mean <= max under the monotone odds transform
  Rng rng(14, 0, 0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> pis;
    for (int i = 0; i < 30; ++i) pis.push_back(0.5 + 0.49 * rng.uniform());
    auto e = estimate_gammas(pis);
    CHECK(e.gammabar_hat <= e.gamma_hat + 1e-12);
  }
}

TEST_CASE("odds ratios against the unbiased pair", "[calibration]") {
  auto ors = bias_odds_ratios({0.5, 2.0 / 3});
  CHECK(ors[0] == Catch::Approx(1.0));
  CHECK(ors[1] == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("full calibration pipeline on synthetic data", "[calibration][slow]") {
  Rng rng(505, 0, 0);
  auto recs = synthetic(2000, 0.08, 1.0, 0.05, 1.0, rng);
  CalibrationFit fit = calibrate(recs);
  CHECK(fit.gamma_hat >= fit.gammabar_hat);
  CHECK(fit.gammabar_hat >= 1.0);
  for (double p : fit.pi_star) {
    CHECK(p >= 0.5);
    CHECK(p <= 1.0);
  }
}
