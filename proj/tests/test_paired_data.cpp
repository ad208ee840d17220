#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "extsens/paired_data.hpp"
#include "test_support.hpp"

using namespace extsens;
using testsupport::make_pairs;

TEST_CASE("difference-in-means scores under the sharp null", "[paired_data]") {
  auto one = make_pairs({{3.0, 1.0}}, {1});
  PairedSample s = build_scores(one, HypothesisModel::fisher(),
                                StatisticKind::difference_in_means);
  CHECK(s.q[0][0] == Catch::Approx(2.0));
  CHECK(s.q[0][1] == Catch::Approx(-2.0));
  CHECK(s.t_obs == Catch::Approx(2.0));

  auto three = make_pairs({{5.0, 2.0}, {4.0, 4.0}, {1.0, 3.0}}, {1, 1, 1});
  PairedSample s3 = build_scores(three, HypothesisModel::fisher(),
                                 StatisticKind::difference_in_means);
  CHECK(s3.t_obs == Catch::Approx(1.0 / 3).epsilon(1e-14));

  // t_obs equals the mean treated-minus-control difference
  double mean_diff = ((5.0 - 2.0) + 0.0 + (1.0 - 3.0)) / 3.0;
  CHECK(s3.t_obs == Catch::Approx(mean_diff).margin(1e-12));
}

TEST_CASE("multiplicative scores use log responses", "[paired_data]") {
  auto one = make_pairs({{std::exp(1.0), 1.0}}, {1});
  PairedSample s = build_scores(one, HypothesisModel::multiplicative(1.0),
                                StatisticKind::difference_in_means);
  CHECK(s.q[0][0] == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(s.q[0][1] == Catch::Approx(-1.0).epsilon(1e-14));

  auto bad = make_pairs({{-1.0, 2.0}}, {1});
  CHECK_THROWS_AS(build_scores(bad, HypothesisModel::multiplicative(1.5),
                               StatisticKind::difference_in_means),
                  ValidationError);
}

TEST_CASE("mcnemar scores require binary responses", "[paired_data]") {
  auto ok = make_pairs({{1.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}}, {1, 0, 1});
  PairedSample s =
      build_scores(ok, HypothesisModel::fisher(), StatisticKind::mcnemar);
  // discordant treated-positive pair contributes 1, concordant-positive 1
  CHECK(s.t_obs == Catch::Approx(2.0));

  auto bad = make_pairs({{0.5, 0.0}}, {1});
  CHECK_THROWS_AS(
      build_scores(bad, HypothesisModel::fisher(), StatisticKind::mcnemar),
      ValidationError);
}

TEST_CASE("signed-rank scores rank the absolute gaps", "[paired_data]") {
  auto data = make_pairs({{4.0, 1.0}, {2.0, 2.5}, {7.0, 7.0}}, {1, 1, 1});
  PairedSample s = build_scores(data, HypothesisModel::fisher(),
                                StatisticKind::wilcoxon_signed_rank);
  CHECK(s.q[0][0] == Catch::Approx(2.0));  // |3| is the larger gap
  CHECK(s.q[0][1] == 0.0);
  CHECK(s.q[1][0] == 0.0);
  CHECK(s.q[1][1] == Catch::Approx(1.0));
  CHECK(s.q[2][0] == 0.0);  // zero difference carries no weight
  CHECK(s.q[2][1] == 0.0);
  CHECK(s.t_obs == Catch::Approx(2.0));
}

TEST_CASE("empty input refused", "[paired_data]") {
  CHECK_THROWS_AS(build_scores({}, HypothesisModel::fisher(),
                               StatisticKind::difference_in_means),
                  ValidationError);
}

TEST_CASE("statistic invariant to within-pair relabeling", "[paired_data]") {
  auto data = make_pairs({{5.0, 2.0}, {4.0, 1.0}}, {1, 0});
  PairedSample a = build_scores(data, HypothesisModel::fisher(),
                                StatisticKind::difference_in_means);
  // relabel pair 0
  std::swap(data[0].r[0], data[0].r[1]);
  std::swap(data[0].z[0], data[0].z[1]);
  PairedSample b = build_scores(data, HypothesisModel::fisher(),
                                StatisticKind::difference_in_means);
  CHECK(a.t_obs == Catch::Approx(b.t_obs).margin(1e-14));
}

TEST_CASE("covariate adjustment projects out the span", "[paired_data]") {
  auto data = make_pairs({{1.0, 0.0}, {2.0, 0.0}}, {1, 1});
  PairedSample s = build_scores(data, HypothesisModel::fisher(),
                                StatisticKind::difference_in_means);

  SECTION("empty covariates leave q unchanged") {
    PairedSample adj = adjust_scores(s, {});
    CHECK(adj.q == s.q);
    CHECK(adj.t_obs == s.t_obs);
  }

  SECTION("constant column removes the mean only") {
    // q = (0.5, -0.5, 1, -1)/1 has mean 0, so projection on 1 changes nothing
    std::vector<std::vector<double>> ones(4, std::vector<double>{1.0});
    PairedSample adj = adjust_scores(s, ones);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(adj.q[i][0] == Catch::Approx(s.q[i][0]).margin(1e-12));
      CHECK(adj.q[i][1] == Catch::Approx(s.q[i][1]).margin(1e-12));
    }
  }

  SECTION("q inside the span is annihilated") {
    std::vector<std::vector<double>> x;
    for (std::size_t i = 0; i < 2; ++i) {
      x.push_back({s.q[i][0]});
      x.push_back({s.q[i][1]});
    }
    PairedSample adj = adjust_scores(s, x);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(adj.q[i][0] == Catch::Approx(0.0).margin(1e-12));
      CHECK(adj.q[i][1] == Catch::Approx(0.0).margin(1e-12));
    }
    CHECK(adj.t_obs == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("idempotence") {
    std::vector<std::vector<double>> x = {{1.0, 0.3}, {0.0, 1.0}, {2.0, -1.0},
                                          {0.5, 0.25}};
    PairedSample once = adjust_scores(s, x);
    PairedSample twice = adjust_scores(once, x);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(twice.q[i][0] == Catch::Approx(once.q[i][0]).margin(1e-12));
      CHECK(twice.q[i][1] == Catch::Approx(once.q[i][1]).margin(1e-12));
    }
  }

  SECTION("rank deficiency is refused with column indices") {
    std::vector<std::vector<double>> x = {
        {1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}, {4.0, 8.0}};
    CHECK_THROWS_WITH(adjust_scores(s, x),
                      Catch::Matchers::ContainsSubstring("rank_deficient"));
  }
}

TEST_CASE("orientation sorts gaps nonnegative", "[paired_data]") {
  PairedSample s;
  s.pairs = make_pairs({{0.0, 0.0}, {0.0, 0.0}}, {1, 1});
  s.q = {{-1.0, 3.0}, {2.0, 2.0}};
  s.t_obs = -1.0 + 2.0;

  OrientedSample g = orient_for_alternative(s, Side::greater);
  CHECK(g.sample.q[0][0] == 3.0);
  CHECK(g.sample.q[0][1] == -1.0);
  CHECK(g.gaps[0] == Catch::Approx(4.0));
  CHECK(g.gaps[1] == 0.0);
  // relabeling kept the observed statistic
  CHECK(g.sample.treated_score_sum() == Catch::Approx(g.sample.t_obs));

  PairedSample s2;
  s2.pairs = make_pairs({{0.0, 0.0}, {0.0, 0.0}}, {1, 1});
  s2.q = {{1.0, -1.0}, {-2.0, 5.0}};
  s2.t_obs = 1.0 - 2.0;
  OrientedSample l = orient_for_alternative(s2, Side::less);
  CHECK(l.gaps[0] == Catch::Approx(2.0));
  CHECK(l.gaps[1] == Catch::Approx(7.0));
  CHECK(l.sample.q[0][0] == Catch::Approx(1.0));
  CHECK(l.sample.q[1][0] == Catch::Approx(2.0));
  CHECK(l.sample.q[1][1] == Catch::Approx(-5.0));

  // per-pair sums and absolute gaps survive orientation
  OrientedSample g2 = orient_for_alternative(s2, Side::greater);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(g2.sample.q[i][0] + g2.sample.q[i][1] ==
          Catch::Approx(s2.q[i][0] + s2.q[i][1]));
    CHECK(std::fabs(g2.sample.q[i][0] - g2.sample.q[i][1]) ==
          Catch::Approx(std::fabs(s2.q[i][0] - s2.q[i][1])));
  }
}
