#pragma once

namespace sqmc {

/// Inputs to norm_quantile are clamped to [kQuantileEps, 1 - kQuantileEps].
inline constexpr double kQuantileEps = 0x1p-53;

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc; absolute error is well below 1e-12 on the clamped
/// domain.
double norm_quantile(double p);

/// Standard normal quantile of exp(log_p), unclamped: stays accurate for
/// probabilities far below kQuantileEps. log_p must be <= 0.
double norm_quantile_log(double log_p);

/// log N(x; mean, var).
double norm_logpdf(double x, double mean, double var);

/// log of the standard normal CDF, accurate in the far left tail.
double norm_logcdf(double x);

}  // namespace sqmc
