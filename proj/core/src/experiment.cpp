#include "rofso/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <json.hpp>
#include <sstream>

#include "rofso/errors.hpp"
#include "rofso/text_io.hpp"

namespace rofso {

namespace fs = std::filesystem;

namespace {

constexpr const char* kTrajectoryHeader = "iteration,lambda,objective,slack";

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) {
    throw IoError("error while writing '" + path.string() + "'");
  }
}

void write_eval_csv(const fs::path& path, const std::vector<EvalRecord>& rows) {
  auto out = open_output(path);
  out << kTrajectoryHeader << '\n';
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_double(r.lambda) << ',' << format_double(r.objective)
        << ',' << format_double(r.slack) << '\n';
  }
  close_output(out, path);
}

void write_sdg_csv(const fs::path& path, const std::vector<SdgRecord>& rows) {
  auto out = open_output(path);
  out << kTrajectoryHeader << '\n';
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_double(r.lambda) << ',' << format_double(r.objective)
        << ',' << format_double(r.slack) << '\n';
  }
  close_output(out, path);
}

void write_pddl_csv(const fs::path& path, const std::vector<TrainRecord>& rows) {
  auto out = open_output(path);
  out << kTrajectoryHeader << ",mean_sigma,grad_norm\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_double(r.lambda) << ',' << format_double(r.objective)
        << ',' << format_double(r.slack) << ',' << format_double(r.mean_sigma) << ','
        << format_double(r.grad_norm) << '\n';
  }
  close_output(out, path);
}

template <typename Record>
std::vector<double> slack_series(const std::vector<Record>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.slack);
  return out;
}

void fill_training_stats(PolicySummary& summary, const std::vector<double>& slack,
                         std::size_t window, const ExperimentConfig& cfg) {
  summary.train_slack_window = trailing_abs_mean(slack, window);
  summary.iterations_to_tolerance =
      iterations_to_tolerance(slack, window, cfg.feasibility_tol * cfg.p_t);
}

}  // namespace

PowerAllocation equal_power_baseline(std::size_t m, double p_t, double p_s) {
  if (m == 0) {
    throw std::invalid_argument("equal_power_baseline: m must be at least 1");
  }
  return {std::vector<double>(m, std::min(p_t / static_cast<double>(m), p_s))};
}

Evaluator::Evaluator(const ExperimentConfig& cfg, Weights weights)
    : weights_(std::move(weights)), model_(cfg.system), p_t_(cfg.p_t) {
  Rng rng = Rng::derive(cfg.seed, streams::evaluation);
  csi_ = CsiSampler(cfg.channel).sample(rng, cfg.eval_samples);
}

EvalPoint Evaluator::evaluate(const AllocationRule& rule) const {
  double objective = 0.0;
  double power = 0.0;
  for (const auto& csi : csi_) {
    const PowerAllocation alloc = rule(csi);
    for (std::size_t i = 0; i < alloc.size(); ++i) {
      objective += weights_.omega[i] * model_.capacity(alloc.p[i], csi.h[i]);
    }
    power += alloc.total();
  }
  const double n = static_cast<double>(csi_.size());
  return {objective / n, p_t_ - power / n};
}

double trailing_abs_mean(std::span<const double> slack, std::size_t window) {
  if (slack.empty() || window == 0) return 0.0;
  const std::size_t n = std::min(window, slack.size());
  double sum = 0.0;
  for (std::size_t k = slack.size() - n; k < slack.size(); ++k) sum += std::abs(slack[k]);
  return sum / static_cast<double>(n);
}

std::optional<std::size_t> iterations_to_tolerance(std::span<const double> slack,
                                                   std::size_t window, double tol) {
  if (window == 0 || slack.size() < window) return std::nullopt;
  std::vector<double> means(slack.size() - window + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < slack.size(); ++k) {
    sum += std::abs(slack[k]);
    if (k >= window) sum -= std::abs(slack[k - window]);
    if (k + 1 >= window) means[k + 1 - window] = sum / static_cast<double>(window);
  }
  std::optional<std::size_t> first;
  for (std::size_t j = means.size(); j-- > 0;) {
    if (means[j] > tol) break;
    first = j + window - 1;
  }
  return first;
}

const PolicySummary* ComparisonReport::find(const std::string& policy) const {
  for (const auto& p : policies) {
    if (p.policy == policy) return &p;
  }
  return nullptr;
}

std::optional<double> ComparisonReport::ratio(const std::string& a, const std::string& b) const {
  const auto* pa = find(a);
  const auto* pb = find(b);
  if (!pa || !pb || pb->objective == 0.0) return std::nullopt;
  return pa->objective / pb->objective;
}

std::string ComparisonReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["p_t"] = p_t;
  j["feasibility_tol"] = feasibility_tol;
  auto& arr = j["policies"] = nlohmann::ordered_json::array();
  for (const auto& p : policies) {
    nlohmann::ordered_json e;
    e["policy"] = p.policy;
    e["objective"] = p.objective;
    e["slack"] = p.slack;
    e["train_slack_window"] = p.train_slack_window;
    e["iterations_to_tolerance"] = p.iterations_to_tolerance
                                       ? nlohmann::ordered_json(*p.iterations_to_tolerance)
                                       : nlohmann::ordered_json(nullptr);
    e["out_of_support"] = p.out_of_support;
    if (p.sampled_objective) e["sampled_objective"] = *p.sampled_objective;
    arr.push_back(e);
  }
  auto& gaps = j["ratios"] = nlohmann::ordered_json::object();
  for (const auto& [a, b] : {std::pair{"pddl", "sdg"}, std::pair{"sdg", "baseline"},
                             std::pair{"pddl", "baseline"}}) {
    if (const auto r = ratio(a, b)) gaps[std::string(a) + "/" + b] = *r;
  }
  return j.dump(2) + "\n";
}

std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  out << "experiment " << name << "  (P_T = " << format_double(p_t) << " W)\n";
  for (const auto& p : policies) {
    out << "  " << p.policy << ": objective " << format_double(p.objective) << " nats, slack "
        << format_double(p.slack) << " W, training |slack| " << format_double(p.train_slack_window)
        << " W";
    if (p.iterations_to_tolerance) out << ", feasible after " << *p.iterations_to_tolerance;
    if (p.sampled_objective) out << ", sampled policy " << format_double(*p.sampled_objective);
    out << '\n';
  }
  for (const auto& [a, b] : {std::pair{"pddl", "sdg"}, std::pair{"sdg", "baseline"},
                             std::pair{"pddl", "baseline"}}) {
    if (const auto r = ratio(a, b)) {
      out << "  " << a << "/" << b << " = " << format_double(*r) << '\n';
    }
  }
  return out.str();
}

SdgRun run_sdg_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator) {
  Rng rng = Rng::derive(cfg.seed, streams::sdg_csi);
  SdgRun run;
  run.result = run_sdg(cfg.sdg, cfg.channel, cfg.system, evaluator.weights(), cfg.p_t, cfg.p_s,
                       rng, [&](const SdgPolicy& policy) {
                         return evaluator.evaluate(
                             [&](const CsiVector& csi) { return policy.allocate(csi); });
                       });
  const auto& final_eval = run.result.evaluations.back();
  run.summary.policy = "sdg";
  run.summary.objective = final_eval.objective;
  run.summary.slack = final_eval.slack;
  fill_training_stats(run.summary, slack_series(run.result.records), cfg.sdg.window, cfg);
  return run;
}

PddlRun run_pddl_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator,
                            CapacityOracle* oracle) {
  ModelCapacityOracle model_oracle(cfg.system);
  CapacityOracle& observe = oracle ? *oracle : model_oracle;
  ChannelCsiSource source(cfg.channel, Rng::derive(cfg.seed, streams::pddl_csi));
  Rng rng = Rng::derive(cfg.seed, streams::pddl_policy);

  PddlRun run;
  run.result = run_pddl(cfg.pddl, source, observe, evaluator.weights(), cfg.p_t, cfg.p_s, rng,
                        [&](const PolicyParams& params) {
                          return evaluator.evaluate(
                              [&](const CsiVector& csi) { return params.mean_allocation(csi); });
                        });
  const auto& final_eval = run.result.evaluations.back();
  run.summary.policy = "pddl";
  run.summary.objective = final_eval.objective;
  run.summary.slack = final_eval.slack;
  run.summary.out_of_support = run.result.out_of_support;
  Rng draw = Rng::derive(cfg.seed, streams::sampled_evaluation);
  run.summary.sampled_objective =
      evaluator
          .evaluate([&](const CsiVector& csi) {
            PowerAllocation alloc;
            for (std::size_t i = 0; i < csi.size(); ++i) {
              alloc.p.push_back(run.result.params.distribution(i, csi.h[i]).sample(draw));
            }
            return alloc;
          })
          .objective;
  fill_training_stats(run.summary, slack_series(run.result.records), cfg.sdg.window, cfg);
  return run;
}

PolicySummary run_baseline_experiment(const ExperimentConfig& cfg, const Evaluator& evaluator) {
  const PowerAllocation fixed = equal_power_baseline(cfg.m, cfg.p_t, cfg.p_s);
  const EvalPoint point = evaluator.evaluate([&](const CsiVector&) { return fixed; });
  PolicySummary summary;
  summary.policy = "baseline";
  summary.objective = point.objective;
  summary.slack = point.slack;
  summary.train_slack_window = std::abs(point.slack);
  return summary;
}

ComparisonReport run_experiment(const ExperimentConfig& cfg, Solvers which,
                                const RunOptions& options) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }

  const Evaluator evaluator(cfg, resolve_weights(cfg));
  const bool want_sdg = which == Solvers::sdg || which == Solvers::all;
  const bool want_pddl = which == Solvers::pddl || which == Solvers::all;
  const bool want_baseline = which == Solvers::baseline || which == Solvers::all;

  const auto policy = options.parallel ? std::launch::async : std::launch::deferred;
  std::future<SdgRun> sdg;
  std::future<PddlRun> pddl;
  if (want_sdg) sdg = std::async(policy, [&] { return run_sdg_experiment(cfg, evaluator); });
  if (want_pddl) pddl = std::async(policy, [&] { return run_pddl_experiment(cfg, evaluator); });

  ComparisonReport report;
  report.name = cfg.name;
  report.p_t = cfg.p_t;
  report.feasibility_tol = cfg.feasibility_tol;

  {
    const fs::path path = dir / "config.ini";
    auto out = open_output(path);
    out << serialize_config(cfg);
    close_output(out, path);
  }
  if (want_sdg) {
    const SdgRun run = sdg.get();
    write_sdg_csv(dir / "sdg_trajectory.csv", run.result.records);
    write_eval_csv(dir / "sdg_eval.csv", run.result.evaluations);
    report.policies.push_back(run.summary);
  }
  if (want_pddl) {
    const PddlRun run = pddl.get();
    write_pddl_csv(dir / "pddl_trajectory.csv", run.result.records);
    write_eval_csv(dir / "pddl_eval.csv", run.result.evaluations);
    const fs::path path = dir / "pddl_policy.ckpt";
    auto out = open_output(path);
    write_checkpoint(out, run.result.params.to_checkpoint());
    close_output(out, path);
    report.policies.push_back(run.summary);
  }
  if (want_baseline) {
    const PolicySummary summary = run_baseline_experiment(cfg, evaluator);
    write_eval_csv(dir / "baseline_eval.csv", {{0, 0.0, summary.objective, summary.slack}});
    report.policies.push_back(summary);
  }

  for (const auto& [file, text] : {std::pair{"report.json", report.to_json()},
                                   std::pair{"report.txt", report.to_text()}}) {
    const fs::path path = dir / file;
    auto out = open_output(path);
    out << text;
    close_output(out, path);
  }
  return report;
}

fs::path emit_plot_script(const fs::path& dir) {
  struct Series {
    const char* file;
    const char* label;
  };
  static constexpr Series kEval[] = {{"sdg_eval.csv", "SDG"},
                                     {"pddl_eval.csv", "PDDL"},
                                     {"baseline_eval.csv", "Equal power"}};
  std::vector<Series> present;
  for (const auto& s : kEval) {
    if (fs::exists(dir / s.file)) present.push_back(s);
  }
  if (present.empty()) {
    throw IoError("no evaluation CSVs in '" + dir.string() + "'; run an experiment first");
  }

  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
        "# Objective and constraint curves for the experiment in this directory.\n"
        "import csv\n"
        "import os\n\n"
        "import matplotlib\n"
        "matplotlib.use(\"Agg\")\n"
        "import matplotlib.pyplot as plt\n\n"
        "HERE = os.path.dirname(os.path.abspath(__file__))\n"
        "SERIES = [\n";
  for (const auto& s : present) {
    py << "    (\"" << s.file << "\", \"" << s.label << "\"),\n";
  }
  py << "]\n\n\n"
        "def load(name):\n"
        "    with open(os.path.join(HERE, name), newline=\"\") as f:\n"
        "        rows = list(csv.DictReader(f))\n"
        "    it = [int(r[\"iteration\"]) for r in rows]\n"
        "    return it, [float(r[\"objective\"]) for r in rows], [float(r[\"slack\"]) for r in rows]\n\n\n"
        "def main():\n"
        "    fig, (ax_obj, ax_slack) = plt.subplots(1, 2, figsize=(10, 4))\n"
        "    last = max(load(name)[0][-1] for name, _ in SERIES) or 1\n"
        "    for name, label in SERIES:\n"
        "        it, obj, slack = load(name)\n"
        "        if len(it) == 1:\n"
        "            it, obj, slack = [0, last], obj * 2, slack * 2\n"
        "        ax_obj.plot(it, obj, label=label)\n"
        "        ax_slack.plot(it, slack, label=label)\n"
        "    ax_obj.set_xlabel(\"iteration\")\n"
        "    ax_obj.set_ylabel(\"objective (nats)\")\n"
        "    ax_slack.set_xlabel(\"iteration\")\n"
        "    ax_slack.set_ylabel(\"P_T - E[sum P] (W)\")\n"
        "    ax_slack.axhline(0.0, color=\"gray\", linewidth=0.5)\n"
        "    ax_obj.legend()\n"
        "    fig.tight_layout()\n"
        "    fig.savefig(os.path.join(HERE, \"curves.png\"), dpi=150)\n\n\n"
        "if __name__ == \"__main__\":\n"
        "    main()\n";

  const fs::path path = dir / "plot.py";
  auto out = open_output(path);
  out << py.str();
  close_output(out, path);
  return path;
}

}  // namespace rofso
