#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "rofso/capacity.hpp"
#include "rofso/dual.hpp"
#include "rofso/evaluation.hpp"
#include "rofso/fso_channel.hpp"
#include "rofso/mlp.hpp"
#include "rofso/policy.hpp"
#include "rofso/random.hpp"
#include "rofso/schedule.hpp"
#include "rofso/types.hpp"

namespace rofso {

struct PddlConfig {
  std::size_t iterations = 20000;
  std::size_t batch_size = 32;
  StepSchedule delta{5e-4, StepSchedule::Kind::constant};  ///< primal stepsize
  StepSchedule eta{0.02, StepSchedule::Kind::constant};    ///< dual stepsize
  double lambda0 = 0.0;
  /// Batches of CSI drawn before training to fit the input normalization.
  std::size_t warmup_batches = 10;
  /// Subtract a running mean of the sampled Lagrangian before weighting scores.
  bool variance_reduction = false;
  double baseline_decay = 0.99;
  MlpSpec net;
  double sigma_min_frac = 1e-3;
  double sigma_max_frac = 0.5;
  /// Evaluation period, in iterations, for the optional evaluator.
  std::size_t eval_every = 100;
  std::size_t max_step_halvings = 10;

  void validate() const;
  bool operator==(const PddlConfig&) const = default;
};

/// Standardization of log10(h) for one channel's network input.
struct InputNormalizer {
  double shift = 0.0;
  double scale = 1.0;

  double apply(double gain) const;
  bool operator==(const InputNormalizer&) const = default;
};

/// m independent per-wavelength networks with their input normalizers.
struct PolicyParams {
  MlpSpec spec;
  std::vector<MlpParams> nets;
  std::vector<InputNormalizer> normalizers;
  PolicyHead head{};
  double p_s = 0.0;

  std::size_t channels() const noexcept { return nets.size(); }

  /// Power distribution of channel i at gain h.
  TruncatedGaussian distribution(std::size_t channel, double gain) const;

  /// Expected power of every channel under the policy (deterministic use).
  PowerAllocation mean_allocation(const CsiVector& csi) const;

  Checkpoint to_checkpoint() const;
  static PolicyParams from_checkpoint(const Checkpoint& ckpt);

  bool operator==(const PolicyParams&) const = default;
};

/// Source of i.i.d. CSI batches.
class CsiSource {
 public:
  virtual ~CsiSource() = default;
  virtual std::vector<CsiVector> draw(std::size_t count) = 0;
};

/// CSI drawn from the log-normal channel model with its own random stream.
class ChannelCsiSource final : public CsiSource {
 public:
  ChannelCsiSource(const ChannelParams& params, Rng rng) : sampler_(params), rng_(rng) {}
  std::vector<CsiVector> draw(std::size_t count) override { return sampler_.sample(rng_, count); }

 private:
  CsiSampler sampler_;
  Rng rng_;
};

/// Everything kept from one policy draw that the score gradient needs.
struct PolicySample {
  ForwardCache cache;
  double raw[2];
  double power;
  TruncatedGaussian::Score score;
};

struct PolicyBatch {
  std::vector<CsiVector> csi;
  std::vector<PowerAllocation> powers;
  /// samples[j * m + i] is channel i of batch entry j
  std::vector<PolicySample> samples;
  std::size_t degenerate_draws = 0;

  std::size_t size() const noexcept { return powers.size(); }
};

/// Forward every network on its normalized gain, build the truncated
/// Gaussian and draw one power per channel and sample.
/// Throws NumericalError on non-finite network output.
PolicyBatch sample_batch(const PolicyParams& params, std::vector<CsiVector> csi_batch, Rng& rng);

/// Score-function estimate of the Lagrangian gradient:
///   (1/S) sum_j (L_j - b) grad_theta log pi(P_j | h_j),
///   L_j = sum_i omega_i C_ji + lambda (P_T - sum_i P_ji),
/// where the log-density factorizes over channels. One gradient per network.
/// `capacities[j]` are the observed per-channel capacities of sample j.
/// Throws std::invalid_argument on shape mismatch.
std::vector<std::vector<double>> policy_gradient(const PolicyParams& params,
                                                 const PolicyBatch& batch,
                                                 const std::vector<std::vector<double>>& capacities,
                                                 double lambda, double p_t, const Weights& weights,
                                                 double baseline = 0.0);

/// Sampled Lagrangian L_j for every batch entry.
std::vector<double> sampled_lagrangian(const PolicyBatch& batch,
                                       const std::vector<std::vector<double>>& capacities,
                                       double lambda, double p_t, const Weights& weights);

struct PrimalUpdate {
  PolicyParams params;
  double step;              ///< stepsize actually applied
  std::size_t halvings;
};

/// theta <- theta + delta grad. A step producing non-finite parameters is
/// retried with half the stepsize; NumericalError after `max_halvings`.
PrimalUpdate primal_update(const PolicyParams& params,
                           const std::vector<std::vector<double>>& grads, double delta,
                           std::size_t max_halvings = 10);

struct TrainRecord {
  std::size_t iteration;
  double lambda;
  double objective;   ///< batch mean of sum_i omega_i C_ji from the oracle
  double slack;       ///< P_T - batch mean of sum_i P_ji
  double mean_sigma;
  double grad_norm;
};

using PolicyEvaluator = std::function<EvalPoint(const PolicyParams&)>;

struct PddlResult {
  PolicyParams params;
  double lambda;
  std::vector<TrainRecord> records;
  std::vector<EvalRecord> evaluations;
  std::size_t out_of_support = 0;  ///< sampled powers outside [0, P_S]; must stay zero
  std::size_t degenerate_draws = 0;
  std::size_t step_halvings = 0;
};

/// Primal-dual learning loop. The link is observed only through `oracle`;
/// `evaluator`, when given, runs every `eval_every` iterations and after
/// the last one.
PddlResult run_pddl(const PddlConfig& cfg, CsiSource& csi_source, CapacityOracle& oracle,
                    const Weights& weights, double p_t, double p_s, Rng& rng,
                    const PolicyEvaluator& evaluator = {});

}  // namespace rofso
