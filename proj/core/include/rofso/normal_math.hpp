#pragma once

// Standard normal density, distribution and quantile functions built on
// std::erfc. Tail quantities are available in log form so that truncated
// normal normalizers stay finite far into the tails.

namespace rofso {

inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x);
double normal_log_pdf(double x);

/// Phi(x).
double normal_cdf(double x);

/// 1 - Phi(x), accurate in the upper tail.
double normal_sf(double x);

/// log(1 - Phi(x)); finite for every finite x.
double normal_log_sf(double x);

/// log(Phi(x)); finite for every finite x.
double normal_log_cdf(double x);

/// log(Phi(b) - Phi(a)) for a < b, computed on the tail side that keeps
/// the difference well conditioned. Returns -inf only if the mass is not
/// representable even in log form.
double normal_log_interval(double a, double b);

/// Inverse of Phi on (0, 1): rational approximation followed by one Halley
/// refinement step. Returns +-inf at the endpoints.
double normal_quantile(double p);

}  // namespace rofso
