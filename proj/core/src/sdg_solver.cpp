#include "rofso/sdg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rofso/errors.hpp"
#include "rofso/line_search.hpp"

namespace rofso {

void SdgConfig::validate() const {
  if (iterations == 0) throw ConfigError("sdg.iterations", "must be at least 1");
  if (batch_size == 0) throw ConfigError("sdg.batch_size", "must be at least 1");
  if (!(eta.base > 0.0)) throw ConfigError("sdg.eta", "must be positive");
  if (grid_points < 2) throw ConfigError("sdg.grid_points", "must be at least 2");
  if (!(refine_tol > 0.0)) throw ConfigError("sdg.refine_tol", "must be positive");
  if (!(lambda0 >= 0.0)) throw ConfigError("sdg.lambda0", "must be nonnegative");
  if (window == 0) throw ConfigError("sdg.window", "must be at least 1");
  if (eval_every == 0) throw ConfigError("sdg.eval_every", "must be at least 1");
}

double lagrangian_term(double power, double lambda, double gain, double omega,
                       const CnrModel& model) {
  return omega * model.capacity(power, gain) - lambda * power;
}

double primal_step(double lambda, double gain, double omega, const CnrModel& model, double p_s,
                   std::size_t grid_points, double refine_tol) {
  auto f = [&](double p) { return lagrangian_term(p, lambda, gain, omega, model); };
  return grid_golden_maximize(f, 0.0, p_s, grid_points, refine_tol).x;
}

PowerAllocation SdgPolicy::allocate(const CsiVector& csi) const {
  if (csi.size() != weights.size()) {
    throw std::invalid_argument("SdgPolicy::allocate: CSI length does not match weights");
  }
  PowerAllocation alloc;
  alloc.p.resize(csi.size());
  for (std::size_t i = 0; i < csi.size(); ++i) {
    alloc.p[i] =
        primal_step(lambda, csi.h[i], weights.omega[i], model, p_s, grid_points, refine_tol);
  }
  return alloc;
}

SdgResult run_sdg(const SdgConfig& cfg, const ChannelParams& chan, const SystemParams& sys,
                  const Weights& weights, double p_t, double p_s, Rng& rng,
                  const SdgEvaluator& evaluator) {
  cfg.validate();
  sys.validate();
  if (!(p_t > 0.0)) throw ConfigError("p_t", "must be positive");
  if (!(p_s > 0.0)) throw ConfigError("p_s", "must be positive");
  if (weights.size() != chan.channels()) {
    throw ConfigError("weights", "length differs from the number of wavelengths");
  }

  const CsiSampler sampler(chan);
  SdgPolicy policy{cfg.lambda0, weights, CnrModel(sys), p_s, cfg.grid_points, cfg.refine_tol};

  SdgResult result{{}, {}, policy};
  result.records.reserve(cfg.iterations);
  std::vector<PowerAllocation> allocations(cfg.batch_size);

  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    const double lambda = policy.lambda;
    if (evaluator && k % cfg.eval_every == 0) {
      const EvalPoint point = evaluator(policy);
      result.evaluations.push_back({k, lambda, point.objective, point.slack});
    }
    double objective = 0.0;
    double total_power = 0.0;
    for (std::size_t j = 0; j < cfg.batch_size; ++j) {
      const CsiVector csi = sampler.sample(rng);
      allocations[j] = policy.allocate(csi);
      for (std::size_t i = 0; i < csi.size(); ++i) {
        objective += weights.omega[i] * policy.model.capacity(allocations[j].p[i], csi.h[i]);
      }
      total_power += allocations[j].total();
    }
    const double s = static_cast<double>(cfg.batch_size);
    objective /= s;
    if (!std::isfinite(objective)) {
      throw NumericalError("run_sdg: non-finite objective at iteration " + std::to_string(k) +
                           "; check system parameters");
    }
    policy.lambda = dual_update(lambda, total_power / s, cfg.eta.at(k), p_t);
    result.records.push_back({k, lambda, objective, p_t - total_power / s});
  }

  const std::size_t tail = std::min(cfg.window, result.records.size());
  double lambda_sum = 0.0;
  for (std::size_t k = result.records.size() - tail; k < result.records.size(); ++k) {
    lambda_sum += result.records[k].lambda;
  }
  policy.lambda = lambda_sum / static_cast<double>(tail);
  if (evaluator) {
    const EvalPoint point = evaluator(policy);
    result.evaluations.push_back({cfg.iterations, policy.lambda, point.objective, point.slack});
  }
  result.policy = std::move(policy);
  return result;
}

}  // namespace rofso
