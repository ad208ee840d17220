#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "extsens/math.hpp"
#include "extsens/rng.hpp"

using namespace extsens;

TEST_CASE("normal quantile matches reference values", "[math]") {
  // reference values from an independent quantile implementation
  CHECK(norm_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(norm_quantile(0.995) == Catch::Approx(2.5758293035489004).epsilon(1e-12));
  CHECK(norm_quantile(0.955) == Catch::Approx(1.6953977102721358).epsilon(1e-12));
  CHECK(norm_quantile(0.5) == Catch::Approx(0.0).margin(1e-14));
  CHECK(norm_quantile(1e-10) == Catch::Approx(-6.361340902404056).epsilon(1e-9));
  for (double p : {0.001, 0.01, 0.2, 0.42, 0.77, 0.9999}) {
    CHECK(norm_cdf(norm_quantile(p)) == Catch::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("chi-square(1) quantile", "[math]") {
  CHECK(chi2_1_quantile(0.91) == Catch::Approx(2.874373395996008).epsilon(1e-10));
  CHECK(chi2_1_quantile(0.95) == Catch::Approx(3.841458820694124).epsilon(1e-10));
  CHECK(chi2_1_quantile(0.0) == 0.0);
  CHECK(chi2_1_quantile(-0.2) == 0.0);
}

TEST_CASE("binomial upper tail", "[math]") {
  CHECK(binomial_upper_tail(5, 0.5, 5) == Catch::Approx(1.0 / 32).epsilon(1e-14));
  CHECK(binomial_upper_tail(2, 2.0 / 3, 2) == Catch::Approx(4.0 / 9).epsilon(1e-14));
  CHECK(binomial_upper_tail(7, 0.6, 4) == Catch::Approx(0.710208).epsilon(1e-12));
  CHECK(binomial_upper_tail(10, 0.3, 0) == 1.0);
  CHECK(binomial_upper_tail(10, 0.0, 1) == 0.0);
  CHECK(binomial_upper_tail(10, 1.0, 10) == 1.0);
  CHECK(binomial_upper_tail(10, 0.25, 11) == 0.0);
}

TEST_CASE("bennett rate function", "[math]") {
  CHECK(bennett_h(0.0) == 0.0);
  CHECK(bennett_h(1.0) == Catch::Approx(2.0 * std::log(2.0) - 1.0));
  CHECK(bennett_h(0.5) > 0.0);
}

TEST_CASE("bracketed root finder", "[math]") {
  auto f = [](double x) { return x * x * x - 2.0; };
  double r = find_root(f, 0.0, 2.0, 1e-14);
  CHECK(r == Catch::Approx(std::cbrt(2.0)).epsilon(1e-12));

  // piecewise linear, the shape the solver sees
  auto g = [](double x) { return std::max(-1.0, std::min(1.0, 3.0 * (x - 0.4))); };
  CHECK(find_root(g, -5.0, 5.0, 1e-13) == Catch::Approx(0.4).margin(1e-10));
}

TEST_CASE("rng streams are deterministic and substream-independent", "[rng]") {
  Rng a(42, 3, 7), b(42, 3, 7), c(42, 3, 8);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  bool any_diff = false;
  for (int i = 0; i < 10; ++i) any_diff |= (a.next_u64() != c.next_u64());
  CHECK(any_diff);
}

TEST_CASE("rng normals have sane moments", "[rng]") {
  Rng rng(7, 0, 0);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(sum / n == Catch::Approx(0.0).margin(0.01));
  CHECK(sum_sq / n == Catch::Approx(1.0).margin(0.02));
}
