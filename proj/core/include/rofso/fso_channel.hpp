#pragma once

#include <cstddef>
#include <vector>

#include "rofso/random.hpp"
#include "rofso/types.hpp"

namespace rofso {

inline constexpr double kDefaultFirstWavelength = 1520e-9;
inline constexpr double kDefaultWavelengthStep = 5e-9;
inline constexpr double kDefaultGuardBand = 5e-9;

/// Physical description of the FSO link. Lengths in metres.
struct ChannelParams {
  double alpha = 0.0;     ///< attenuation coefficient, 1/m
  double distance = 1000.0;
  std::vector<double> wavelengths;
  double d_tx = 0.05;     ///< transmitter aperture diameter
  double d_rx = 0.1;      ///< receiver aperture diameter
  double sigma_x2 = 0.1;  ///< log-irradiance variance of the turbulence
  double n0 = 1.0;        ///< noise normalizer applied to |h_a h_t|^2
  double guard_band = kDefaultGuardBand;
  bool clamp_gain_to_unity = false;

  std::size_t channels() const noexcept { return wavelengths.size(); }

  /// Throws ConfigError naming the first violated field.
  void validate() const;

  bool operator==(const ChannelParams&) const = default;
};

/// m wavelengths starting at `first`, spaced by `step`.
std::vector<double> wavelength_grid(std::size_t m, double first = kDefaultFirstWavelength,
                                    double step = kDefaultWavelengthStep);

/// Deterministic attenuation h_a = A_TX A_RX / (d lambda)^2 * exp(-alpha d)
/// for the wavelength at `index`. Throws std::out_of_range on a bad index.
double attenuation_gain(const ChannelParams& params, std::size_t index);

/// Unit-mean log-normal turbulence factor exp(z), z ~ N(-s/2, s).
double sample_turbulence(Rng& rng, double sigma_x2);

/// `count` i.i.d. CSI vectors, h_i = |h_a(lambda_i) h_t,i|^2 / n0, with an
/// independent turbulence draw per wavelength and per sample.
std::vector<CsiVector> sample_csi(const ChannelParams& params, Rng& rng, std::size_t count);

/// Per-wavelength attenuation gains, computed once for repeated sampling.
class CsiSampler {
 public:
  explicit CsiSampler(const ChannelParams& params);

  CsiVector sample(Rng& rng) const;
  std::vector<CsiVector> sample(Rng& rng, std::size_t count) const;

  std::size_t channels() const noexcept { return scale_.size(); }

 private:
  std::vector<double> scale_;  // h_a^2 / n0
  double sigma_x2_;
};

}  // namespace rofso
