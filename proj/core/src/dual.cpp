#include "rofso/dual.hpp"

#include <algorithm>
#include <stdexcept>

namespace rofso {

DualState dual_step(DualState state, std::span<const PowerAllocation> allocations, double eta,
                    double p_t) {
  if (allocations.empty()) {
    throw std::invalid_argument("dual_step: empty batch");
  }
  double sum = 0.0;
  for (const auto& a : allocations) sum += a.total();
  return {dual_update(state.lambda, sum / static_cast<double>(allocations.size()), eta, p_t)};
}

double dual_update(double lambda, double mean_total_power, double eta, double p_t) {
  return std::max(0.0, lambda - eta * (p_t - mean_total_power));
}

}  // namespace rofso
