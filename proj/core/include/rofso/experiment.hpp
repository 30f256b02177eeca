#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rofso/capacity.hpp"
#include "rofso/config.hpp"
#include "rofso/evaluation.hpp"
#include "rofso/pddl_solver.hpp"
#include "rofso/sdg_solver.hpp"

namespace rofso {

/// Offsets of the child random streams derived from the master seed.
namespace streams {
inline constexpr std::uint64_t sdg_csi = 1;
inline constexpr std::uint64_t pddl_csi = 2;
inline constexpr std::uint64_t pddl_policy = 3;
inline constexpr std::uint64_t evaluation = 4;
inline constexpr std::uint64_t sampled_evaluation = 5;
}  // namespace streams

/// Constant allocation min(p_t / m, p_s) on every wavelength.
PowerAllocation equal_power_baseline(std::size_t m, double p_t, double p_s);

using AllocationRule = std::function<PowerAllocation(const CsiVector&)>;

/// Held-out CSI set shared by every policy of one experiment, with the
/// analytic model used to score them.
class Evaluator {
 public:
  Evaluator(const ExperimentConfig& cfg, Weights weights);

  EvalPoint evaluate(const AllocationRule& rule) const;

  const std::vector<CsiVector>& csi() const noexcept { return csi_; }
  const Weights& weights() const noexcept { return weights_; }

 private:
  std::vector<CsiVector> csi_;
  Weights weights_;
  CnrModel model_;
  double p_t_;
};

/// Mean of |slack| over the last `window` entries.
double trailing_abs_mean(std::span<const double> slack, std::size_t window);

/// First iteration from which the trailing-window mean |slack| stays within
/// `tol` through the end of the run, if any.
std::optional<std::size_t> iterations_to_tolerance(std::span<const double> slack,
                                                   std::size_t window, double tol);

struct PolicySummary {
  std::string policy;
  double objective = 0.0;           ///< held-out objective of the final policy
  double slack = 0.0;               ///< held-out P_T - mean total power
  double train_slack_window = 0.0;  ///< trailing-window mean |slack| during training
  std::optional<std::size_t> iterations_to_tolerance;
  std::size_t out_of_support = 0;
  /// Held-out objective when powers are drawn from the stochastic policy
  /// instead of taken at its mean. PDDL only.
  std::optional<double> sampled_objective;
};

struct ComparisonReport {
  std::string name;
  double p_t = 0.0;
  double feasibility_tol = 0.0;
  std::vector<PolicySummary> policies;

  const PolicySummary* find(const std::string& policy) const;
  /// objective(a) / objective(b), when both are present.
  std::optional<double> ratio(const std::string& a, const std::string& b) const;

  std::string to_json() const;
  std::string to_text() const;
};

struct SdgRun {
  SdgResult result;
  PolicySummary summary;
};

struct PddlRun {
  PddlResult result;
  PolicySummary summary;
};

SdgRun run_sdg_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator);

/// Trains through `oracle` when given, otherwise through the analytic model.
PddlRun run_pddl_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator,
                            CapacityOracle* oracle = nullptr);

PolicySummary run_baseline_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator);

enum class Solvers { sdg, pddl, baseline, all };

struct RunOptions {
  bool parallel = false;
};

/// Runs the selected solvers and writes into cfg.output_dir:
///   config.ini, <solver>_trajectory.csv, <solver>_eval.csv,
///   pddl_policy.ckpt, report.json, report.txt.
/// Every file is a pure function of the config.
ComparisonReport run_experiment(const ExperimentConfig& cfg, Solvers which,
                                const RunOptions& options = {});

/// Writes `plot.py` next to the CSVs in `dir`, referencing them by relative
/// path. Throws IoError if `dir` holds no trajectory or evaluation CSVs.
std::filesystem::path emit_plot_script(const std::filesystem::path& dir);

}  // namespace rofso
