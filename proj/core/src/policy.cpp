#include "rofso/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rofso/normal_math.hpp"

namespace rofso {

TruncatedGaussian::TruncatedGaussian(double mu, double sigma, double lower, double upper)
    : mu_(mu), sigma_(sigma), lower_(lower), upper_(upper) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(lower) ||
      !std::isfinite(upper)) {
    throw std::invalid_argument("TruncatedGaussian: non-finite parameter");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("TruncatedGaussian: sigma must be positive");
  if (!(lower < upper)) throw std::invalid_argument("TruncatedGaussian: lower must be < upper");
  alpha_ = (lower - mu) / sigma;
  beta_ = (upper - mu) / sigma;
  log_z_ = normal_log_interval(alpha_, beta_);
  degenerate_ = !std::isfinite(log_z_) || (alpha_ >= 0.0 && normal_sf(alpha_) == 0.0) ||
                (beta_ <= 0.0 && normal_cdf(beta_) == 0.0);
}

double TruncatedGaussian::log_pdf(double x) const {
  if (!(x >= lower_ && x <= upper_)) {
    throw std::domain_error("TruncatedGaussian::log_pdf: x outside the support");
  }
  const double z = (x - mu_) / sigma_;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(sigma_) - log_z_;
}

TruncatedGaussian::Score TruncatedGaussian::grad_log_pdf(double x) const {
  if (!(x >= lower_ && x <= upper_)) {
    throw std::domain_error("TruncatedGaussian::grad_log_pdf: x outside the support");
  }
  const double z = (x - mu_) / sigma_;
  const double ra = std::exp(normal_log_pdf(alpha_) - log_z_);  // phi(alpha) / Z
  const double rb = std::exp(normal_log_pdf(beta_) - log_z_);
  return {z / sigma_ + (rb - ra) / sigma_,
          (z * z - 1.0) / sigma_ + (beta_ * rb - alpha_ * ra) / sigma_};
}

double TruncatedGaussian::cdf(double x) const {
  if (x <= lower_) return 0.0;
  if (x >= upper_) return 1.0;
  const double z = (x - mu_) / sigma_;
  return std::min(1.0, std::exp(normal_log_interval(alpha_, z) - log_z_));
}

double TruncatedGaussian::mean() const {
  const double ra = std::exp(normal_log_pdf(alpha_) - log_z_);
  const double rb = std::exp(normal_log_pdf(beta_) - log_z_);
  return std::clamp(mu_ + sigma_ * (ra - rb), lower_, upper_);
}

double TruncatedGaussian::sample(Rng& rng) const {
  const double u = rng.uniform();
  if (degenerate_) {
    return std::abs(mu_ - lower_) <= std::abs(mu_ - upper_) ? lower_ : upper_;
  }
  double z;
  if (alpha_ >= 0.0) {
    // whole support in the upper tail: invert the survival function
    const double qa = normal_sf(alpha_);
    const double qb = normal_sf(beta_);
    z = -normal_quantile(qa - u * (qa - qb));
  } else if (beta_ <= 0.0) {
    const double pa = normal_cdf(alpha_);
    const double pb = normal_cdf(beta_);
    z = normal_quantile(pa + u * (pb - pa));
  } else {
    const double mass = std::exp(log_z_);
    const double p = normal_cdf(alpha_) + u * mass;
    if (p < 0.5) {
      z = normal_quantile(p);
    } else {
      z = -normal_quantile(normal_sf(beta_) + (1.0 - u) * mass);
    }
  }
  return std::clamp(mu_ + sigma_ * z, lower_, upper_);
}

PolicyHead PolicyHead::for_peak(double p_s, double min_frac, double max_frac) {
  return {min_frac * p_s, max_frac * p_s};
}

void PolicyHead::validate() const {
  if (!(sigma_min > 0.0) || !(sigma_min < sigma_max) || !std::isfinite(sigma_max)) {
    throw std::invalid_argument("PolicyHead: need 0 < sigma_min < sigma_max");
  }
}

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

TruncatedGaussian from_network_outputs(std::span<const double> raw, double p_s,
                                       const PolicyHead& head) {
  if (raw.size() != 2) {
    throw std::invalid_argument("from_network_outputs: expected two raw outputs");
  }
  if (!std::isfinite(raw[0]) || !std::isfinite(raw[1])) {
    throw std::invalid_argument("from_network_outputs: non-finite network output");
  }
  const double mu = p_s * logistic(raw[0]);
  const double sigma = head.sigma_min + (head.sigma_max - head.sigma_min) * logistic(raw[1]);
  return TruncatedGaussian(mu, sigma, 0.0, p_s);
}

HeadJacobian head_jacobian(std::span<const double> raw, double p_s, const PolicyHead& head) {
  if (raw.size() != 2) {
    throw std::invalid_argument("head_jacobian: expected two raw outputs");
  }
  const double s0 = logistic(raw[0]);
  const double s1 = logistic(raw[1]);
  return {p_s * s0 * (1.0 - s0), (head.sigma_max - head.sigma_min) * s1 * (1.0 - s1)};
}

}  // namespace rofso
