#include "rofso/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rofso/errors.hpp"

namespace rofso {

namespace {
thread_local std::uint64_t tl_cnr_evaluations = 0;
}

bool within_peak(const PowerAllocation& alloc, double peak) {
  return std::all_of(alloc.p.begin(), alloc.p.end(),
                     [peak](double v) { return v >= 0.0 && v <= peak; });
}

void SystemParams::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(key, "must be finite and strictly positive");
    }
  };
  positive(omi, "omi");
  if (omi > 1.0) {
    throw ConfigError("omi", "must lie in (0, 1]");
  }
  positive(m_p, "m_p");
  positive(r, "r");
  positive(rin, "rin");
  positive(e_charge, "e_charge");
  positive(k_boltz, "k_boltz");
  positive(temperature, "temperature");
  positive(r_f, "r_f");
  if (!(f_excess >= 0.0) || !std::isfinite(f_excess)) {
    throw ConfigError("f_excess", "must be finite and nonnegative");
  }
}

double rin_from_db(double rin_db_hz, double bandwidth_hz) {
  return std::pow(10.0, rin_db_hz / 10.0) * bandwidth_hz;
}

CnrModel::CnrModel(const SystemParams& sys) {
  const double signal = sys.omi * sys.m_p * sys.r;
  a_ = 0.5 * signal * signal;
  b_ = sys.rin * sys.r * sys.r;
  c_ = 2.0 * sys.e_charge * std::pow(sys.m_p, 2.0 + sys.f_excess) * sys.r;
  d_ = 4.0 * sys.k_boltz * sys.temperature / sys.r_f;
}

double CnrModel::cnr(double power, double gain) const {
  ++tl_cnr_evaluations;
  const double x = power * gain;
  return a_ * x * x / ((b_ * x + c_) * x + d_);
}

double CnrModel::capacity(double power, double gain) const {
  return std::log1p(cnr(power, gain));
}

double CnrModel::plateau() const noexcept { return a_ / b_; }

double cnr(double power, double gain, const SystemParams& sys) {
  return CnrModel(sys).cnr(power, gain);
}

double capacity(double power, double gain, const SystemParams& sys) {
  return CnrModel(sys).capacity(power, gain);
}

double weighted_sum_capacity(const PowerAllocation& alloc, const CsiVector& csi,
                             const Weights& weights, const SystemParams& sys) {
  if (alloc.size() != csi.size() || alloc.size() != weights.size()) {
    throw std::invalid_argument("weighted_sum_capacity: length mismatch");
  }
  const CnrModel model(sys);
  double total = 0.0;
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    total += weights.omega[i] * model.capacity(alloc.p[i], csi.h[i]);
  }
  return total;
}

std::uint64_t cnr_evaluation_count() noexcept { return tl_cnr_evaluations; }

void reset_cnr_evaluation_count() noexcept { tl_cnr_evaluations = 0; }

std::vector<double> CapacityOracle::observe_all(const PowerAllocation& alloc,
                                                const CsiVector& csi) {
  if (alloc.size() != csi.size()) {
    throw std::invalid_argument("observe_all: allocation and CSI lengths differ");
  }
  std::vector<double> out(alloc.size());
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    out[i] = observe(i, alloc.p[i], csi.h[i]);
  }
  return out;
}

double ModelCapacityOracle::observe(std::size_t /*channel*/, double power, double gain) {
  return model_.capacity(power, gain);
}

double NoisyCapacityOracle::observe(std::size_t channel, double power, double gain) {
  return inner_.observe(channel, power, gain) + noise_std_ * rng_.normal();
}

}  // namespace rofso
