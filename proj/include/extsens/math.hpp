#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include "extsens/error.hpp"

namespace extsens {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, giving near machine precision on (0, 1).
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw ValidationError("quantile_domain", "normal quantile needs p in [0,1]");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement.
  double e = norm_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

/// Quantile of the chi-square distribution with one degree of freedom.
/// Returns 0 for p <= 0 (the squared-deviate test then always rejects).
inline double chi2_1_quantile(double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return kInf;
  double z = norm_quantile(0.5 * (1.0 + p));
  return z * z;
}

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Exact upper tail P(B(n, p) >= k), summed in log space.
inline double binomial_upper_tail(int n, double p, int k) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw ValidationError("binomial_domain", "need n >= 0 and p in [0,1]");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double lp = std::log(p), lq = std::log1p(-p);
  double sum = 0.0;
  for (int j = k; j <= n; ++j)
    sum += std::exp(log_choose(n, j) + j * lp + (n - j) * lq);
  return sum < 1.0 ? sum : 1.0;
}

/// h(x) = (1+x)log(1+x) - x, the rate function in Bennett's inequality.
inline double bennett_h(double x) { return (1.0 + x) * std::log1p(x) - x; }

/// Root of f on [lo, hi] with f(lo), f(hi) of opposite sign (either may be 0).
/// Illinois-damped regula falsi with a bisection safeguard; converges fast on
/// the piecewise-linear systems solved here.
inline double find_root(const std::function<double(double)>& f, double lo,
                        double hi, double flo, double fhi, double xtol,
                        int max_iter = 200) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw NumericalError("root_bracket", "root not bracketed", flo);
  double x = lo;
  for (int it = 0; it < max_iter; ++it) {
    if (hi - lo <= xtol) break;
    // Secant proposal, fall back to midpoint if it leaves the bracket.
    x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
      fhi *= 0.5;  // Illinois damping keeps the stale end moving
    } else {
      hi = x;
      fhi = fx;
      flo *= 0.5;
    }
  }
  return 0.5 * (lo + hi);
}

inline double find_root(const std::function<double(double)>& f, double lo,
                        double hi, double xtol, int max_iter = 200) {
  return find_root(f, lo, hi, f(lo), f(hi), xtol, max_iter);
}

}  // namespace extsens
