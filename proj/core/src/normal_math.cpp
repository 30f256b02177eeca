#include "rofso/normal_math.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace rofso {

namespace {

// Below this the erfc route underflows; switch to the asymptotic series.
constexpr double kTailSwitch = 30.0;

double log_sf_asymptotic(double x) {
  const double inv2 = 1.0 / (x * x);
  // 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8
  const double series =
      1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * 105.0)));
  return -0.5 * x * x - std::log(x) - kLogSqrt2Pi + std::log(series);
}

}  // namespace

double normal_pdf(double x) { return std::exp(normal_log_pdf(x)); }

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_log_sf(double x) {
  if (x < kTailSwitch) {
    return std::log(normal_sf(x));
  }
  return log_sf_asymptotic(x);
}

double normal_log_cdf(double x) { return normal_log_sf(-x); }

double normal_log_interval(double a, double b) {
  if (!(a < b)) {
    return -std::numeric_limits<double>::infinity();
  }
  if (a >= 0.0) {
    // Q(a) - Q(b), both upper tails
    const double la = normal_log_sf(a);
    const double lb = normal_log_sf(b);
    return la + std::log1p(-std::exp(lb - la));
  }
  if (b <= 0.0) {
    const double lb = normal_log_cdf(b);
    const double la = normal_log_cdf(a);
    return lb + std::log1p(-std::exp(la - lb));
  }
  // straddles zero: at least half of one side is inside
  return std::log1p(-(normal_cdf(a) + normal_sf(b)));
}

double normal_quantile(double p) {
  if (!(p > 0.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  if (!(p < 1.0)) {
    return std::numeric_limits<double>::infinity();
  }

  // Acklam's rational approximation, relative error about 1.15e-9.
  static constexpr std::array<double, 6> a{
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley step. The residual is taken on the tail that holds p so that
  // small probabilities keep their relative accuracy.
  double e;
  if (x < 0.0) {
    e = normal_cdf(x) - p;
  } else {
    e = (1.0 - p) - normal_sf(x);
  }
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace rofso
