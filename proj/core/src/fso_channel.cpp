#include "rofso/fso_channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rofso/errors.hpp"

namespace rofso {

void ChannelParams::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(key, "must be finite and strictly positive");
    }
  };
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha", "must be finite and nonnegative");
  }
  positive(distance, "distance");
  positive(d_tx, "d_tx");
  positive(d_rx, "d_rx");
  positive(n0, "n0");
  positive(guard_band, "guard_band");
  if (!(sigma_x2 >= 0.0) || !std::isfinite(sigma_x2)) {
    throw ConfigError("sigma_x2", "must be finite and nonnegative");
  }
  if (wavelengths.empty()) {
    throw ConfigError("wavelengths", "at least one wavelength is required");
  }
  for (std::size_t i = 0; i < wavelengths.size(); ++i) {
    positive(wavelengths[i], "wavelengths");
    if (i > 0) {
      const double spacing = wavelengths[i] - wavelengths[i - 1];
      // relative slack so that a grid built with step == guard_band passes
      if (spacing < guard_band * (1.0 - 1e-9)) {
        throw ConfigError("wavelengths", "adjacent spacing below guard band at index " +
                                             std::to_string(i));
      }
    }
  }
}

std::vector<double> wavelength_grid(std::size_t m, double first, double step) {
  std::vector<double> grid(m);
  for (std::size_t i = 0; i < m; ++i) {
    grid[i] = first + static_cast<double>(i) * step;
  }
  return grid;
}

double attenuation_gain(const ChannelParams& params, std::size_t index) {
  if (index >= params.wavelengths.size()) {
    throw std::out_of_range("attenuation_gain: wavelength index " + std::to_string(index) +
                            " out of range");
  }
  const double area_tx = std::numbers::pi * 0.25 * params.d_tx * params.d_tx;
  const double area_rx = std::numbers::pi * 0.25 * params.d_rx * params.d_rx;
  const double dl = params.distance * params.wavelengths[index];
  const double gain = area_tx * area_rx / (dl * dl) * std::exp(-params.alpha * params.distance);
  return params.clamp_gain_to_unity ? std::min(gain, 1.0) : gain;
}

double sample_turbulence(Rng& rng, double sigma_x2) {
  if (sigma_x2 == 0.0) {
    return 1.0;
  }
  return std::exp(rng.normal(-0.5 * sigma_x2, std::sqrt(sigma_x2)));
}

CsiSampler::CsiSampler(const ChannelParams& params) : sigma_x2_(params.sigma_x2) {
  params.validate();
  scale_.resize(params.channels());
  for (std::size_t i = 0; i < scale_.size(); ++i) {
    const double ha = attenuation_gain(params, i);
    scale_[i] = ha * ha / params.n0;
  }
}

CsiVector CsiSampler::sample(Rng& rng) const {
  CsiVector csi;
  csi.h.resize(scale_.size());
  for (std::size_t i = 0; i < scale_.size(); ++i) {
    const double ht = sample_turbulence(rng, sigma_x2_);
    csi.h[i] = scale_[i] * ht * ht;
  }
  return csi;
}

std::vector<CsiVector> CsiSampler::sample(Rng& rng, std::size_t count) const {
  std::vector<CsiVector> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    out.push_back(sample(rng));
  }
  return out;
}

std::vector<CsiVector> sample_csi(const ChannelParams& params, Rng& rng, std::size_t count) {
  if (count == 0) {
    throw std::invalid_argument("sample_csi: count must be at least 1");
  }
  return CsiSampler(params).sample(rng, count);
}

}  // namespace rofso
