#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "extsens/oracle.hpp"
#include "test_support.hpp"

using namespace extsens;

namespace {

PairedSample sample_with_q(const std::vector<std::array<double, 2>>& q,
                           double t_obs) {
  PairedSample s;
  s.pairs = testsupport::make_pairs(
      std::vector<std::array<double, 2>>(q.size(), {0.0, 0.0}), {});
  s.q = q;
  s.t_obs = t_obs;
  return s;
}

}  // namespace

TEST_CASE("exact tail on single pairs", "[oracle]") {
  PairedSample s = sample_with_q({{1.0, -1.0}}, 1.0);
  CHECK(oracle::exact_tail(s, {0.5}, 1.0) == Catch::Approx(0.5));
  CHECK(oracle::exact_tail(s, {1.0}, 1.0) == 1.0);
  CHECK(oracle::exact_tail(s, {0.0}, 1.0) == 0.0);
}

TEST_CASE("point-mass probabilities give certainty", "[oracle]") {
  PairedSample s = sample_with_q({{2.0, 0.0}, {1.0, -1.0}, {0.5, 0.2}}, 3.5);
  CHECK(oracle::exact_tail(s, {1.0, 1.0, 1.0}, 3.5) == Catch::Approx(1.0));
}

TEST_CASE("tail matches direct convolution for three pairs", "[oracle]") {
  std::vector<std::array<double, 2>> q = {{1.3, -0.2}, {0.4, 0.4}, {2.0, -1.0}};
  std::vector<double> pi = {0.6, 0.55, 0.8};
  PairedSample s = sample_with_q(q, 0.0);
  // convolution of three two-point distributions
  std::vector<std::pair<double, double>> dist = {{0.0, 1.0}};
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<std::pair<double, double>> next;
    for (auto& [v, p] : dist) {
      next.push_back({v + q[i][0], p * pi[i]});
      next.push_back({v + q[i][1], p * (1.0 - pi[i])});
    }
    dist = next;
  }
  for (double a : {-1.0, 0.5, 1.7, 3.3, 100.0}) {
    double direct = 0.0;
    for (auto& [v, p] : dist)
      if (v >= a) direct += p;
    CHECK(oracle::exact_tail(s, pi, a) == Catch::Approx(direct).margin(1e-13));
  }
}

TEST_CASE("complementary events sum to one", "[oracle]") {
  std::vector<std::array<double, 2>> q = {{0.7, -0.7}, {0.2, -0.4}, {1.1, 0.3},
                                          {0.9, -0.9}};
  PairedSample s = sample_with_q(q, 0.0);
  std::vector<double> pi = {0.5, 0.66, 0.52, 0.61};
  // with a off the atom lattice, P(T >= a) + P(-T >= -a) = 1
  double a = 0.5417771234;
  PairedSample neg = s;
  for (auto& qi : neg.q) {
    qi[0] = -qi[0];
    qi[1] = -qi[1];
  }
  double upper = oracle::exact_tail(s, pi, a);
  double lower = oracle::exact_tail(neg, pi, -a);
  CHECK(upper + lower == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("enumeration cap enforced", "[oracle]") {
  std::vector<std::array<double, 2>> q(17, {1.0, 0.0});
  PairedSample s = sample_with_q(q, 0.0);
  CHECK_THROWS_AS(oracle::exact_tail(s, std::vector<double>(17, 0.5), 0.0),
                  ValidationError);
  oracle::EnumerationLimit raised{18};
  CHECK_NOTHROW(oracle::exact_tail(s, std::vector<double>(17, 0.5), 9.0, raised));
}

TEST_CASE("grid search respects its constraints", "[oracle]") {
  Rng rng(5, 0, 0);
  auto data = testsupport::random_study(5, 0.8, rng);
  auto s = build_scores(data, HypothesisModel::fisher(),
                        StatisticKind::difference_in_means);
  auto oriented = orient_for_alternative(s, Side::greater);
  SensitivityBudget b;
  b.gamma = 1.5;
  b.gammabar = 1.2;
  UncertaintySetSpec spec{UncertaintyKind::clt, 5};
  auto res = oracle::grid_search_min_deviate(oriented, b, spec, 0.02);
  QpProblem prob = assemble(oriented, b, spec);
  double sum = 0.0;
  for (double v : res.pi) {
    CHECK(v >= prob.lower);
    CHECK(v <= prob.upper + 1e-12);
    sum += v;
  }
  CHECK(sum <= prob.budget_rhs + 1e-9);
  CHECK(res.objective == Catch::Approx(prob.zeta(res.pi)).margin(1e-12));

  SECTION("single grid point when gamma = 1") {
    SensitivityBudget b1;
    b1.gamma = 1.0;
    b1.gammabar = 1.0;
    auto r1 = oracle::grid_search_min_deviate(oriented, b1, spec, 0.02);
    CHECK(r1.evaluated == 1);
    for (double v : r1.pi) CHECK(v == 0.5);
  }
}
