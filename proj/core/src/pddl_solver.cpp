#include "rofso/pddl_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rofso/errors.hpp"
#include "rofso/text_io.hpp"

namespace rofso {

namespace {

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& f : split_list(text)) out.push_back(parse_double(f));
  return out;
}

const std::string& require(const Checkpoint& ckpt, const std::string& key) {
  const auto it = ckpt.metadata.find(key);
  if (it == ckpt.metadata.end()) {
    throw std::runtime_error("policy checkpoint: missing meta." + key);
  }
  return it->second;
}

}  // namespace

void PddlConfig::validate() const {
  if (iterations == 0) throw ConfigError("pddl.iterations", "must be at least 1");
  if (batch_size == 0) throw ConfigError("pddl.batch_size", "must be at least 1");
  if (!(delta.base > 0.0)) throw ConfigError("pddl.delta", "must be positive");
  if (!(eta.base > 0.0)) throw ConfigError("pddl.eta", "must be positive");
  if (!(lambda0 >= 0.0)) throw ConfigError("pddl.lambda0", "must be nonnegative");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    throw ConfigError("pddl.baseline_decay", "must lie in [0, 1)");
  }
  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("pddl.layers", e.what());
  }
  if (net.inputs() != 1 || net.outputs() != 2) {
    throw ConfigError("pddl.layers", "policy networks take 1 input and produce 2 outputs");
  }
  if (!(sigma_min_frac > 0.0 && sigma_min_frac < sigma_max_frac)) {
    throw ConfigError("pddl.sigma_min_frac", "need 0 < sigma_min_frac < sigma_max_frac");
  }
  if (eval_every == 0) throw ConfigError("pddl.eval_every", "must be at least 1");
}

double InputNormalizer::apply(double gain) const {
  // floor keeps log10 finite for a zero gain
  return (std::log10(std::max(gain, 1e-300)) - shift) / scale;
}

TruncatedGaussian PolicyParams::distribution(std::size_t channel, double gain) const {
  const double x = normalizers.at(channel).apply(gain);
  const ForwardCache cache = forward(nets.at(channel), spec, std::span<const double>(&x, 1));
  return from_network_outputs(cache.output(), p_s, head);
}

PowerAllocation PolicyParams::mean_allocation(const CsiVector& csi) const {
  if (csi.size() != channels()) {
    throw std::invalid_argument("mean_allocation: CSI length does not match policy");
  }
  PowerAllocation alloc;
  alloc.p.resize(csi.size());
  for (std::size_t i = 0; i < csi.size(); ++i) {
    alloc.p[i] = distribution(i, csi.h[i]).mean();
  }
  return alloc;
}

Checkpoint PolicyParams::to_checkpoint() const {
  Checkpoint ckpt{spec, nets, {}};
  std::vector<double> shift, scale;
  for (const auto& n : normalizers) {
    shift.push_back(n.shift);
    scale.push_back(n.scale);
  }
  ckpt.metadata["p_s"] = format_double(p_s);
  ckpt.metadata["sigma_min"] = format_double(head.sigma_min);
  ckpt.metadata["sigma_max"] = format_double(head.sigma_max);
  ckpt.metadata["input_shift"] = join(shift);
  ckpt.metadata["input_scale"] = join(scale);
  return ckpt;
}

PolicyParams PolicyParams::from_checkpoint(const Checkpoint& ckpt) {
  PolicyParams params;
  params.spec = ckpt.spec;
  params.nets = ckpt.nets;
  params.p_s = parse_double(require(ckpt, "p_s"));
  params.head = {parse_double(require(ckpt, "sigma_min")), parse_double(require(ckpt, "sigma_max"))};
  const auto shift = parse_list(require(ckpt, "input_shift"));
  const auto scale = parse_list(require(ckpt, "input_scale"));
  if (shift.size() != params.nets.size() || scale.size() != params.nets.size()) {
    throw std::runtime_error("policy checkpoint: normalizer count differs from network count");
  }
  for (std::size_t i = 0; i < shift.size(); ++i) {
    params.normalizers.push_back({shift[i], scale[i]});
  }
  return params;
}

PolicyBatch sample_batch(const PolicyParams& params, std::vector<CsiVector> csi_batch, Rng& rng) {
  const std::size_t m = params.channels();
  PolicyBatch batch;
  batch.samples.resize(csi_batch.size() * m);
  batch.powers.resize(csi_batch.size());
  for (std::size_t j = 0; j < csi_batch.size(); ++j) {
    const CsiVector& csi = csi_batch[j];
    if (csi.size() != m) {
      throw std::invalid_argument("sample_batch: CSI length does not match policy");
    }
    batch.powers[j].p.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      PolicySample& s = batch.samples[j * m + i];
      const double x = params.normalizers[i].apply(csi.h[i]);
      forward_into(params.nets[i], params.spec, std::span<const double>(&x, 1), s.cache);
      const auto& out = s.cache.output();
      if (!std::isfinite(out[0]) || !std::isfinite(out[1])) {
        throw NumericalError("sample_batch: non-finite output from network " + std::to_string(i));
      }
      s.raw[0] = out[0];
      s.raw[1] = out[1];
      const TruncatedGaussian dist = from_network_outputs(out, params.p_s, params.head);
      if (dist.degenerate()) ++batch.degenerate_draws;
      s.power = dist.sample(rng);
      s.score = dist.grad_log_pdf(s.power);
      batch.powers[j].p[i] = s.power;
    }
  }
  batch.csi = std::move(csi_batch);
  return batch;
}

std::vector<double> sampled_lagrangian(const PolicyBatch& batch,
                                       const std::vector<std::vector<double>>& capacities,
                                       double lambda, double p_t, const Weights& weights) {
  if (capacities.size() != batch.size()) {
    throw std::invalid_argument("policy gradient: capacity batch length differs from samples");
  }
  std::vector<double> values(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& c = capacities[j];
    if (c.size() != weights.size() || c.size() != batch.powers[j].size()) {
      throw std::invalid_argument("policy gradient: capacity vector length mismatch");
    }
    double utility = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) utility += weights.omega[i] * c[i];
    values[j] = utility + lambda * (p_t - batch.powers[j].total());
  }
  return values;
}

std::vector<std::vector<double>> policy_gradient(const PolicyParams& params,
                                                 const PolicyBatch& batch,
                                                 const std::vector<std::vector<double>>& capacities,
                                                 double lambda, double p_t, const Weights& weights,
                                                 double baseline) {
  const std::size_t m = params.channels();
  if (weights.size() != m) {
    throw std::invalid_argument("policy_gradient: weight count differs from channel count");
  }
  const std::vector<double> lagrangian = sampled_lagrangian(batch, capacities, lambda, p_t, weights);
  const std::size_t q = parameter_count(params.spec);
  std::vector<std::vector<double>> grads(m, std::vector<double>(q, 0.0));
  const double inv_s = 1.0 / static_cast<double>(batch.size());

  for (std::size_t j = 0; j < batch.size(); ++j) {
    const double weight = (lagrangian[j] - baseline) * inv_s;
    for (std::size_t i = 0; i < m; ++i) {
      const PolicySample& s = batch.samples[j * m + i];
      const HeadJacobian jac = head_jacobian(s.raw, params.p_s, params.head);
      const double d_raw[2] = {s.score.d_mu * jac.dmu_draw, s.score.d_sigma * jac.dsigma_draw};
      backward_accumulate(params.nets[i], params.spec, s.cache, d_raw, grads[i], weight);
    }
  }
  return grads;
}

PrimalUpdate primal_update(const PolicyParams& params,
                           const std::vector<std::vector<double>>& grads, double delta,
                           std::size_t max_halvings) {
  if (grads.size() != params.nets.size()) {
    throw std::invalid_argument("primal_update: gradient count differs from network count");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != params.nets[i].theta.size()) {
      throw std::invalid_argument("primal_update: gradient shape mismatch");
    }
  }
  PrimalUpdate update{params, delta, 0};
  for (;;) {
    bool finite = true;
    for (std::size_t i = 0; i < grads.size() && finite; ++i) {
      auto& theta = update.params.nets[i].theta;
      const auto& base = params.nets[i].theta;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        theta[k] = base[k] + update.step * grads[i][k];
        if (!std::isfinite(theta[k])) {
          finite = false;
          break;
        }
      }
    }
    if (finite) return update;
    if (update.halvings == max_halvings) {
      throw NumericalError("primal_update: non-finite parameters after " +
                           std::to_string(max_halvings) + " stepsize halvings");
    }
    update.step *= 0.5;
    ++update.halvings;
  }
}

namespace {

std::vector<InputNormalizer> fit_normalizers(const std::vector<CsiVector>& warmup, std::size_t m) {
  std::vector<InputNormalizer> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (const auto& csi : warmup) {
      const double v = std::log10(std::max(csi.h.at(i), 1e-300));
      ++n;
      const double d = v - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (v - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    out[i].shift = mean;
    out[i].scale = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return out;
}

}  // namespace

PddlResult run_pddl(const PddlConfig& cfg, CsiSource& csi_source, CapacityOracle& oracle,
                    const Weights& weights, double p_t, double p_s, Rng& rng,
                    const PolicyEvaluator& evaluator) {
  cfg.validate();
  if (!(p_t > 0.0)) throw ConfigError("p_t", "must be positive");
  if (!(p_s > 0.0)) throw ConfigError("p_s", "must be positive");
  const std::size_t m = weights.size();
  if (m == 0) throw ConfigError("weights", "at least one channel is required");

  PolicyParams params;
  params.spec = cfg.net;
  params.p_s = p_s;
  params.head = PolicyHead::for_peak(p_s, cfg.sigma_min_frac, cfg.sigma_max_frac);
  params.head.validate();
  for (std::size_t i = 0; i < m; ++i) {
    params.nets.push_back(init_params(cfg.net, rng));
  }
  const std::size_t warmup = std::max<std::size_t>(cfg.warmup_batches, 1) * cfg.batch_size;
  params.normalizers = fit_normalizers(csi_source.draw(warmup), m);

  PddlResult result;
  result.records.reserve(cfg.iterations);
  double lambda = cfg.lambda0;
  std::optional<double> baseline;

  auto evaluate = [&](std::size_t k) {
    if (!evaluator) return;
    const EvalPoint point = evaluator(params);
    result.evaluations.push_back({k, lambda, point.objective, point.slack});
  };

  std::vector<std::vector<double>> capacities;
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    if (k % cfg.eval_every == 0) evaluate(k);

    PolicyBatch batch = sample_batch(params, csi_source.draw(cfg.batch_size), rng);
    result.degenerate_draws += batch.degenerate_draws;

    capacities.resize(batch.size());
    double objective = 0.0;
    double total_power = 0.0;
    double sigma_sum = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      if (!within_peak(batch.powers[j], p_s)) ++result.out_of_support;
      capacities[j] = oracle.observe_all(batch.powers[j], batch.csi[j]);
      for (std::size_t i = 0; i < m; ++i) objective += weights.omega[i] * capacities[j][i];
      total_power += batch.powers[j].total();
    }
    for (const auto& s : batch.samples) {
      sigma_sum += params.head.sigma_min +
                   (params.head.sigma_max - params.head.sigma_min) * logistic(s.raw[1]);
    }
    const double inv_s = 1.0 / static_cast<double>(batch.size());

    double b = 0.0;
    if (cfg.variance_reduction) {
      const auto values = sampled_lagrangian(batch, capacities, lambda, p_t, weights);
      double mean = 0.0;
      for (double v : values) mean += v;
      mean *= inv_s;
      b = baseline.value_or(mean);
      baseline = cfg.baseline_decay * b + (1.0 - cfg.baseline_decay) * mean;
    }

    const auto grads = policy_gradient(params, batch, capacities, lambda, p_t, weights, b);
    double norm2 = 0.0;
    for (const auto& g : grads) {
      for (double v : g) norm2 += v * v;
    }

    PrimalUpdate update = primal_update(params, grads, cfg.delta.at(k), cfg.max_step_halvings);
    params = std::move(update.params);
    result.step_halvings += update.halvings;

    const double mean_total = total_power * inv_s;
    result.records.push_back({k, lambda, objective * inv_s, p_t - mean_total,
                              sigma_sum / static_cast<double>(batch.samples.size()),
                              std::sqrt(norm2)});
    lambda = dual_update(lambda, mean_total, cfg.eta.at(k), p_t);
  }
  evaluate(cfg.iterations);

  result.params = std::move(params);
  result.lambda = lambda;
  return result;
}

}  // namespace rofso
