#include <benchmark/benchmark.h>

#include <vector>

#include "rofso/capacity.hpp"
#include "rofso/fso_channel.hpp"
#include "rofso/mlp.hpp"
#include "rofso/pddl_solver.hpp"
#include "rofso/sdg_solver.hpp"

using namespace rofso;

namespace {

ChannelParams link(std::size_t m) {
  ChannelParams p;
  p.alpha = 0.0122;
  p.wavelengths = wavelength_grid(m);
  return p;
}

Weights weights(std::size_t m) {
  Rng rng(7);
  Weights w;
  for (std::size_t i = 0; i < m; ++i) w.omega.push_back(rng.uniform());
  return w;
}

void BM_Cnr(benchmark::State& state) {
  const CnrModel model{SystemParams{}};
  double p = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.capacity(p, 1e-9));
    p = p < 0.3 ? p + 1e-6 : 0.1;
  }
}
BENCHMARK(BM_Cnr);

void BM_PrimalStep(benchmark::State& state) {
  const CnrModel model{SystemParams{}};
  const auto grid = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(primal_step(8.0, 1e-9, 0.7, model, 0.3, grid));
  }
}
BENCHMARK(BM_PrimalStep)->Arg(64)->Arg(256)->Arg(1024);

void BM_MlpForwardBackward(benchmark::State& state) {
  const MlpSpec spec;
  Rng rng(1);
  const auto params = init_params(spec, rng);
  const std::vector<double> x{0.3};
  const std::vector<double> d{1.0, -0.5};
  std::vector<double> grad(parameter_count(spec), 0.0);
  ForwardCache cache;
  for (auto _ : state) {
    forward_into(params, spec, x, cache);
    backward_accumulate(params, spec, cache, d, grad);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_MlpForwardBackward);

void BM_SdgIteration(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  SdgConfig cfg;
  cfg.iterations = 1;
  const auto chan = link(m);
  const auto w = weights(m);
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sdg(cfg, chan, SystemParams{}, w, 0.15 * m, 0.3, rng));
  }
}
BENCHMARK(BM_SdgIteration)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_PddlIteration(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto chan = link(m);
  const auto w = weights(m);
  ChannelCsiSource source(chan, Rng(3));
  ModelCapacityOracle oracle{SystemParams{}};
  PddlConfig cfg;
  cfg.iterations = 50;  // amortizes initialization and the warmup draw
  cfg.warmup_batches = 1;
  Rng rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_pddl(cfg, source, oracle, w, 0.15 * m, 0.3, rng));
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_PddlIteration)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
