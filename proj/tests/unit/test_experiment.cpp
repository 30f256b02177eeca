#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "rofso/config.hpp"
#include "rofso/errors.hpp"
#include "rofso/experiment.hpp"

using namespace rofso;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = ROFSO_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("ROFSO_TEST_TMP");
  fs::path dir = fs::path(root ? root : fs::temp_directory_path().string()) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig quick(const std::string& bundled, const fs::path& out) {
  auto cfg = load_config(kConfigDir + "/" + bundled + ".ini");
  cfg.sdg.iterations = 150;
  cfg.pddl.iterations = 150;
  cfg.eval_samples = 100;
  cfg.output_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("equal power baseline") {
  CHECK(equal_power_baseline(8, 1.2, 0.3).p == std::vector<double>(8, 0.15));
  const auto clamped = equal_power_baseline(2, 1.0, 0.3);
  CHECK(clamped.p == std::vector<double>{0.3, 0.3});
  CHECK(clamped.total() < 1.0);
  CHECK(equal_power_baseline(1, 0.2, 0.3).p == std::vector<double>{0.2});
  CHECK_THROWS(equal_power_baseline(0, 1.0, 0.3));
}

TEST_CASE("evaluator scores every rule on the same CSI") {
  auto cfg = load_config(kConfigDir + "/fig1_m8.ini");
  cfg.eval_samples = 50;
  const Weights w = resolve_weights(cfg);
  const Evaluator a(cfg, w);
  const Evaluator b(cfg, w);
  CHECK(a.csi() == b.csi());
  CHECK(a.csi().size() == 50);

  const auto base = equal_power_baseline(cfg.m, cfg.p_t, cfg.p_s);
  const auto point = a.evaluate([&](const CsiVector&) { return base; });
  double expected = 0.0;
  for (const auto& csi : a.csi()) expected += weighted_sum_capacity(base, csi, w, cfg.system);
  CHECK(point.objective == doctest::Approx(expected / 50.0).epsilon(1e-14));
  CHECK(point.slack == doctest::Approx(0.0).epsilon(1e-12));

  auto other = cfg;
  other.seed += 1;
  CHECK_FALSE(Evaluator(other, w).csi() == a.csi());
}

TEST_CASE("slack statistics") {
  const std::vector<double> slack{1.0, -1.0, 0.5, 0.1, -0.1, 0.1, 0.0};
  CHECK(trailing_abs_mean(slack, 3) == doctest::Approx(0.2 / 3.0));
  CHECK(trailing_abs_mean(slack, 100) == doctest::Approx(2.8 / 7.0));
  CHECK(trailing_abs_mean({}, 3) == 0.0);

  CHECK(iterations_to_tolerance(slack, 2, 0.15) == 4u);
  CHECK(iterations_to_tolerance(slack, 2, 0.01) == std::nullopt);
  // an early dip below tolerance that does not last is not convergence
  const std::vector<double> dip{0.0, 0.0, 1.0, 1.0, 0.0, 0.0};
  CHECK(iterations_to_tolerance(dip, 2, 0.1) == 5u);
  CHECK(iterations_to_tolerance(dip, 10, 0.1) == std::nullopt);
}

TEST_CASE("experiment files are written and reproducible") {
  const auto dir_a = scratch("repro_a");
  const auto dir_b = scratch("repro_b");
  const auto report = run_experiment(quick("fig1_m8", dir_a), Solvers::all);
  run_experiment(quick("fig1_m8", dir_b), Solvers::all);

  for (const char* file : {"sdg_trajectory.csv", "sdg_eval.csv", "pddl_trajectory.csv",
                           "pddl_eval.csv", "baseline_eval.csv", "pddl_policy.ckpt",
                           "report.json", "report.txt"}) {
    CAPTURE(file);
    CHECK(slurp(dir_a / file) == slurp(dir_b / file));
  }
  // config.ini records its own output directory, so compare the rest
  CHECK(slurp(dir_a / "config.ini").size() > 0);

  const auto sdg = slurp(dir_a / "sdg_trajectory.csv");
  CHECK(sdg.rfind("iteration,lambda,objective,slack\n", 0) == 0);
  const auto pddl = slurp(dir_a / "pddl_trajectory.csv");
  CHECK(pddl.rfind("iteration,lambda,objective,slack,", 0) == 0);
  CHECK(std::count(sdg.begin(), sdg.end(), '\n') == 151);

  const auto json = nlohmann::json::parse(slurp(dir_a / "report.json"));
  CHECK(json["policies"].size() == 3);
  REQUIRE(report.find("pddl"));
  CHECK(report.find("pddl")->out_of_support == 0);
  CHECK(report.find("pddl")->sampled_objective.has_value());
  CHECK(report.ratio("sdg", "baseline").has_value());

  const auto reloaded = load_config(dir_a / "config.ini");
  CHECK(reloaded == quick("fig1_m8", dir_a));
}

TEST_CASE("parallel and sequential runs agree") {
  const auto seq = scratch("seq");
  const auto par = scratch("par");
  run_experiment(quick("fig1_m8", seq), Solvers::all);
  run_experiment(quick("fig1_m8", par), Solvers::all, RunOptions{true});
  for (const char* file : {"sdg_trajectory.csv", "pddl_trajectory.csv", "report.json"}) {
    CHECK(slurp(seq / file) == slurp(par / file));
  }
}

TEST_CASE("single-solver runs") {
  const auto dir = scratch("baseline_only");
  const auto report = run_experiment(quick("fig1_m8", dir), Solvers::baseline);
  REQUIRE(report.policies.size() == 1);
  CHECK(report.policies[0].policy == "baseline");
  CHECK(report.policies[0].slack == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(fs::exists(dir / "sdg_trajectory.csv"));
  CHECK_FALSE(report.ratio("pddl", "sdg").has_value());
}

TEST_CASE("plot scripts for every bundled config") {
  for (const char* name : {"fig1_m8", "fig2_m16_small", "fig2_m16_large"}) {
    const auto dir = scratch(std::string("plot_") + name);
    auto cfg = quick(name, dir);
    cfg.pddl.iterations = 20;
    cfg.sdg.iterations = 20;
    run_experiment(cfg, Solvers::all);
    const auto script = emit_plot_script(dir);
    CHECK(script == dir / "plot.py");
    const auto text = slurp(script);
    for (const char* csv : {"\"sdg_eval.csv\"", "\"pddl_eval.csv\"", "\"baseline_eval.csv\""}) {
      CHECK(text.find(csv) != std::string::npos);
    }
    // data paths are resolved relative to the script
    CHECK(text.find(dir.string()) == std::string::npos);
  }
  const auto empty = scratch("plot_empty");
  fs::create_directories(empty);
  CHECK_THROWS_AS(emit_plot_script(empty), IoError);
}

TEST_CASE("unwritable output directory") {
  const auto blocker = scratch("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "a file, not a directory";
  auto cfg = quick("fig1_m8", blocker / "sub");
  CHECK_THROWS_AS(run_experiment(cfg, Solvers::baseline), IoError);
}
