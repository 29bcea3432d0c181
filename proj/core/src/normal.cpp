#include "sqmc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sqmc {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Acklam's coefficients.
constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                        1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                        6.680131188771972e+01,  -1.328068155288572e+01};
constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                        -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                        3.754408661907416e+00};

constexpr double kLow = 0.02425;

double lower_tail(double p) {
  const double q = std::sqrt(-2.0 * std::log(p));
  return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double central(double p) {
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Quantile for p <= 0.5, refined by one Halley step.
double lower_quantile(double p) {
  double x = p < kLow ? lower_tail(p) : central(p);
  const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_quantile(double p) {
  p = std::clamp(p, kQuantileEps, 1.0 - kQuantileEps);
  if (p <= 0.5) return lower_quantile(p);
  return -lower_quantile(1.0 - p);
}

double norm_quantile_log(double log_p) {
  if (std::isnan(log_p) || log_p > 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (log_p == 0.0) return std::numeric_limits<double>::infinity();
  if (log_p == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  if (log_p >= std::log(kQuantileEps)) return norm_quantile(std::exp(log_p));
  // Deep lower tail: Newton on log Phi(x) = log_p, which is concave, from the
  // leading terms of the Mills-ratio expansion.
  const double a = -2.0 * log_p;
  double x = -std::sqrt(a - std::log(a) - std::log(2.0 * std::numbers::pi));
  for (int i = 0; i < 50; ++i) {
    const double step = (norm_logcdf(x) - log_p) / std::exp(norm_logpdf(x, 0.0, 1.0) - norm_logcdf(x));
    x -= step;
    if (std::abs(step) <= 1e-15 * std::abs(x)) break;
  }
  return x;
}

double norm_logpdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * z * z / var - 0.5 * std::log(var) - kLogSqrt2Pi;
}

double norm_logcdf(double x) {
  if (x > -30.0) return std::log(norm_cdf(x));
  // Asymptotic expansion of the Mills ratio.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - kLogSqrt2Pi + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

}  // namespace sqmc
