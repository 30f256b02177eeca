#pragma once

#include <span>

#include "rofso/types.hpp"

namespace rofso {

/// Multiplier of the expected total power constraint.
struct DualState {
  double lambda = 0.0;
};

/// Projected stochastic dual descent on the total power constraint:
///
///   lambda' = max(0, lambda - eta (P_T - mean_j sum_i p_ji))
///
/// where the batch mean stands in for the expectation over CSI.
/// Throws std::invalid_argument on an empty batch.
DualState dual_step(DualState state, std::span<const PowerAllocation> allocations, double eta,
                    double p_t);

/// Same update given the batch-mean total power directly.
double dual_update(double lambda, double mean_total_power, double eta, double p_t);

}  // namespace rofso
