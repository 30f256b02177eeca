// rofso: run the power allocation experiments from a config file.
//
//   rofso run-sdg      --config configs/fig1_m8.ini [--seed N] [--out DIR] [--iters N]
//   rofso run-pddl     --config ...
//   rofso run-baseline --config ...
//   rofso compare      --config ... [--parallel]
//   rofso plot-script  --out DIR | --config ...
//
// Exit codes: 0 success, 1 usage or unexpected failure, 2 configuration
// error, 3 file system error, 4 numerical failure.

#include <CLI11.hpp>
#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include "rofso/config.hpp"
#include "rofso/errors.hpp"
#include "rofso/experiment.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kNumerical = 4 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> iters;
  bool parallel = false;
};

rofso::ExperimentConfig load(const Overrides& o) {
  rofso::ExperimentConfig cfg = rofso::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.iters) {
    cfg.sdg.iterations = *o.iters;
    cfg.pddl.iterations = *o.iters;
  }
  cfg.validate();
  return cfg;
}

int run(const Overrides& o, rofso::Solvers which) {
  const rofso::ExperimentConfig cfg = load(o);
  const auto start = std::chrono::steady_clock::now();
  const rofso::ComparisonReport report =
      rofso::run_experiment(cfg, which, {.parallel = o.parallel});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << report.to_text() << "wrote " << cfg.output_dir << " in " << seconds << " s\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal WDM power allocation for radio-on-FSO links"};
  app.require_subcommand(1);

  Overrides o;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", o.config, "experiment config file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "override the master seed");
    sub->add_option("--out", o.out, "override the output directory");
    sub->add_option("--iters", o.iters, "override the iteration count of both solvers")
        ->check(CLI::PositiveNumber);
  };

  auto* sdg = app.add_subcommand("run-sdg", "stochastic dual gradient solver");
  auto* pddl = app.add_subcommand("run-pddl", "primal-dual deep learning solver");
  auto* baseline = app.add_subcommand("run-baseline", "equal power allocation");
  auto* compare = app.add_subcommand("compare", "all three policies on a shared evaluation set");
  auto* plot = app.add_subcommand("plot-script", "write plot.py for an output directory");
  for (auto* sub : {sdg, pddl, baseline, compare}) add_common(sub, true);
  compare->add_flag("--parallel", o.parallel, "run the solvers concurrently");
  plot->add_option("--config", o.config, "experiment config; its output_dir is used");
  plot->add_option("--out", o.out, "output directory of a finished run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sdg->parsed()) return run(o, rofso::Solvers::sdg);
    if (pddl->parsed()) return run(o, rofso::Solvers::pddl);
    if (baseline->parsed()) return run(o, rofso::Solvers::baseline);
    if (compare->parsed()) return run(o, rofso::Solvers::all);
    if (plot->parsed()) {
      std::string dir;
      if (o.out) {
        dir = *o.out;
      } else if (!o.config.empty()) {
        dir = rofso::load_config(o.config).output_dir;
      } else {
        std::cerr << "plot-script: give --out DIR or --config FILE\n";
        return kFailure;
      }
      std::cout << "wrote " << rofso::emit_plot_script(dir).string() << '\n';
      return kOk;
    }
  } catch (const rofso::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const rofso::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const rofso::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
