#pragma once

#include <span>

#include "rofso/random.hpp"

namespace rofso {

/// Gaussian N(mu, sigma^2) restricted to [lower, upper].
///
/// The normalizer Z = Phi(beta) - Phi(alpha), with alpha and beta the
/// standardized bounds, is held in log form so that densities and score
/// terms stay finite for Z down to ~1e-300.
class TruncatedGaussian {
 public:
  /// Throws std::invalid_argument unless sigma > 0, lower < upper and all
  /// inputs are finite.
  TruncatedGaussian(double mu, double sigma, double lower, double upper);

  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  double log_normalizer() const noexcept { return log_z_; }

  /// True when the normalizer is not representable; sampling then returns
  /// the bound nearest to mu.
  bool degenerate() const noexcept { return degenerate_; }

  /// Throws std::domain_error for x outside [lower, upper].
  double log_pdf(double x) const;

  struct Score {
    double d_mu;
    double d_sigma;
  };
  /// Partial derivatives of log_pdf(x) in mu and sigma, bounds held fixed.
  Score grad_log_pdf(double x) const;

  double cdf(double x) const;
  double mean() const;

  /// Inverse-CDF draw, clamped to the support.
  double sample(Rng& rng) const;

 private:
  double mu_, sigma_, lower_, upper_;
  double alpha_, beta_;
  double log_z_;
  bool degenerate_ = false;
};

/// Bounds on the policy spread, in watts.
struct PolicyHead {
  double sigma_min;
  double sigma_max;

  /// sigma_min = min_frac * p_s, sigma_max = max_frac * p_s.
  static PolicyHead for_peak(double p_s, double min_frac = 1e-3, double max_frac = 0.5);

  void validate() const;
  bool operator==(const PolicyHead&) const = default;
};

double logistic(double x);

/// Maps two raw network outputs to a power distribution on [0, p_s]:
///   mu    = p_s logistic(raw[0])
///   sigma = sigma_min + (sigma_max - sigma_min) logistic(raw[1])
/// Throws std::invalid_argument on non-finite or wrongly sized input.
TruncatedGaussian from_network_outputs(std::span<const double> raw, double p_s,
                                       const PolicyHead& head);

/// Diagonal of the Jacobian of (mu, sigma) with respect to (raw[0], raw[1]).
struct HeadJacobian {
  double dmu_draw;
  double dsigma_draw;
};
HeadJacobian head_jacobian(std::span<const double> raw, double p_s, const PolicyHead& head);

}  // namespace rofso
