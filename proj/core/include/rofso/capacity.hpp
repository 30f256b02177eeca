#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rofso/random.hpp"
#include "rofso/types.hpp"

namespace rofso {

/// APD receiver constants shared by every wavelength channel. SI units.
struct SystemParams {
  double omi = 0.15;            ///< optical modulation index
  double m_p = 5.0;             ///< photodiode gain
  double r = 0.8;               ///< responsivity, A/W
  double rin = 1e-5;            ///< relative intensity noise, linear, bandwidth-integrated
  double e_charge = 1.602e-19;
  double f_excess = 0.7;        ///< excess noise factor exponent
  double k_boltz = 1.381e-23;
  double temperature = 300.0;
  double r_f = 50.0;            ///< load resistance, ohm

  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

/// RIN given in dB/Hz integrated over `bandwidth_hz`.
double rin_from_db(double rin_db_hz, double bandwidth_hz);

/// Carrier-to-noise ratio of the APD receiver with the coefficients of the
/// noise terms folded once:
///
///   CNR(x) = a x^2 / (b x^2 + c x + d),   x = P h
///
/// a = (omi m_p r)^2 / 2, b = rin r^2, c = 2 e m_p^(2+F) r, d = 4 k T / R_f.
class CnrModel {
 public:
  CnrModel() : CnrModel(SystemParams{}) {}
  explicit CnrModel(const SystemParams& sys);

  double cnr(double power, double gain) const;
  double capacity(double power, double gain) const;

  /// Limit of cnr as P h grows without bound: (omi m_p)^2 / (2 rin).
  double plateau() const noexcept;

 private:
  double a_, b_, c_, d_;
};

double cnr(double power, double gain, const SystemParams& sys);

/// log(1 + CNR), in nats.
double capacity(double power, double gain, const SystemParams& sys);

/// sum_i omega_i capacity(p_i, h_i). Throws std::invalid_argument on a
/// length mismatch.
double weighted_sum_capacity(const PowerAllocation& alloc, const CsiVector& csi,
                             const Weights& weights, const SystemParams& sys);

/// Number of CNR evaluations performed by the calling thread since the last
/// reset. Used to prove that model-free code never reaches the formula.
std::uint64_t cnr_evaluation_count() noexcept;
void reset_cnr_evaluation_count() noexcept;

/// Source of observed per-channel capacities. The learning solver sees the
/// link only through this interface.
class CapacityOracle {
 public:
  virtual ~CapacityOracle() = default;

  /// Observed capacity of wavelength `channel` when sent at `power` over a
  /// channel with gain `gain`.
  virtual double observe(std::size_t channel, double power, double gain) = 0;

  /// One observation per channel, in channel order.
  std::vector<double> observe_all(const PowerAllocation& alloc, const CsiVector& csi);
};

/// Oracle backed by the analytic capacity model. Stateless and thread-safe.
class ModelCapacityOracle final : public CapacityOracle {
 public:
  explicit ModelCapacityOracle(const SystemParams& sys) : model_(sys) {}

  double observe(std::size_t channel, double power, double gain) override;

 private:
  CnrModel model_;
};

/// Wraps another oracle and adds zero-mean Gaussian measurement noise.
/// Owns its random stream, so it is not thread-safe.
class NoisyCapacityOracle final : public CapacityOracle {
 public:
  NoisyCapacityOracle(CapacityOracle& inner, double noise_std, Rng rng)
      : inner_(inner), noise_std_(noise_std), rng_(rng) {}

  double observe(std::size_t channel, double power, double gain) override;

 private:
  CapacityOracle& inner_;
  double noise_std_;
  Rng rng_;
};

}  // namespace rofso
