#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "rofso/capacity.hpp"
#include "rofso/dual.hpp"
#include "rofso/evaluation.hpp"
#include "rofso/fso_channel.hpp"
#include "rofso/random.hpp"
#include "rofso/schedule.hpp"
#include "rofso/types.hpp"

namespace rofso {

struct SdgConfig {
  std::size_t iterations = 3000;
  std::size_t batch_size = 32;
  StepSchedule eta{0.05, StepSchedule::Kind::constant};
  std::size_t grid_points = 256;
  double refine_tol = 1e-9;
  double lambda0 = 0.0;
  /// Trailing window used for convergence checks and for averaging lambda*.
  std::size_t window = 100;
  /// Evaluation period, in iterations, for the optional evaluator.
  std::size_t eval_every = 100;

  void validate() const;
  bool operator==(const SdgConfig&) const = default;
};

/// Maximizer of the per-channel Lagrangian
///   omega log(1 + CNR(P, h)) - lambda P   over P in [0, p_s].
/// Grid scan followed by golden-section refinement.
double primal_step(double lambda, double gain, double omega, const CnrModel& model, double p_s,
                   std::size_t grid_points = 256, double refine_tol = 1e-9);

/// Value of the per-channel Lagrangian at `power`.
double lagrangian_term(double power, double lambda, double gain, double omega,
                       const CnrModel& model);

/// Allocation induced by a fixed multiplier: each channel solved on its own.
struct SdgPolicy {
  double lambda = 0.0;
  Weights weights;
  CnrModel model;
  double p_s = 0.0;
  std::size_t grid_points = 256;
  double refine_tol = 1e-9;

  PowerAllocation allocate(const CsiVector& csi) const;
};

struct SdgRecord {
  std::size_t iteration;
  double lambda;
  double objective;  ///< batch mean of sum_i omega_i C_i
  double slack;      ///< P_T - batch mean of sum_i p_i
};

struct SdgResult {
  std::vector<SdgRecord> records;
  std::vector<EvalRecord> evaluations;
  /// Policy at lambda averaged over the trailing window.
  SdgPolicy policy;
};

using SdgEvaluator = std::function<EvalPoint(const SdgPolicy&)>;

/// Stochastic dual gradient: per iteration draw S fresh CSI samples, solve
/// the separable primal problem at the current multiplier, then take a
/// projected dual step. `evaluator`, when given, runs every `eval_every`
/// iterations and once more on the final averaged policy.
/// Throws NumericalError on a non-finite objective.
SdgResult run_sdg(const SdgConfig& cfg, const ChannelParams& chan, const SystemParams& sys,
                  const Weights& weights, double p_t, double p_s, Rng& rng,
                  const SdgEvaluator& evaluator = {});

}  // namespace rofso
