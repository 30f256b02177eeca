#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rofso/capacity.hpp"
#include "rofso/fso_channel.hpp"
#include "rofso/pddl_solver.hpp"
#include "rofso/sdg_solver.hpp"
#include "rofso/types.hpp"

namespace rofso {

/// Either an explicit weight list or uniform(0, 1) draws from `seed`.
struct WeightSpec {
  enum class Mode { explicit_list, random_uniform_0_1 };

  Mode mode = Mode::random_uniform_0_1;
  std::vector<double> values;
  std::uint64_t seed = 7;

  bool operator==(const WeightSpec&) const = default;
};

/// Everything needed to reproduce one experiment.
struct ExperimentConfig {
  std::string name = "experiment";
  std::size_t m = 8;
  double p_t = 1.2;
  double p_s = 0.3;
  WeightSpec weights;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::size_t eval_samples = 1000;
  /// Allowed trailing-window mean |slack| as a fraction of P_T.
  double feasibility_tol = 0.05;

  ChannelParams channel;
  SystemParams system;
  SdgConfig sdg;
  PddlConfig pddl;

  /// Cross-section consistency; throws ConfigError naming the key.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Sectioned `key = value` text:
///
///   [experiment]  name, m, p_t, p_s, seed, weights, weight_seed, output_dir,
///                 eval_samples, feasibility_tol
///   [channel]     alpha, distance, d_tx, d_rx, sigma_x2, n0, guard_band_m | guard_band_nm,
///                 clamp_gain_to_unity, wavelengths_m | wavelength_start_nm +
///                 wavelength_step_nm
///   [system]      omi, m_p, r, rin | rin_db_hz + noise_bandwidth_hz,
///                 e_charge, f_excess, k_boltz, temperature, r_f
///   [sdg]         iterations, batch_size, eta, eta_schedule, grid_points,
///                 refine_tol, lambda0, window, eval_every
///   [pddl]        iterations, batch_size, delta, delta_schedule, eta,
///                 eta_schedule, lambda0, warmup_batches, variance_reduction,
///                 baseline_decay, layers, activation, sigma_min_frac,
///                 sigma_max_frac, eval_every, max_step_halvings
///
/// Missing keys take their defaults; unknown keys are errors. `weights` is
/// `random_uniform_0_1` or a comma-separated list.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

Weights resolve_weights(const ExperimentConfig& cfg);

}  // namespace rofso
