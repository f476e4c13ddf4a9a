// Serial reference vs OpenMP fan-out of the quenched-mean ensemble. The two
// produce bit-identical results; only wall time differs.

#include <benchmark/benchmark.h>

#include "rwre/cltlab.hpp"

namespace {

rwre::ExperimentConfig config(std::int64_t replicas) {
  rwre::ExperimentConfig cfg;
  cfg.law = rwre::reference_law_k2();
  cfg.nList = {64, 256};
  cfg.sGrid = {0.5, 1.0};
  cfg.rList = {0.0, 0.5};
  cfg.replicas = replicas;
  return cfg;
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto cfg = config(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rwre::run_ensemble_serial(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto cfg = config(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rwre::run_ensemble(cfg, static_cast<int>(state.range(1))));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = static_cast<double>(state.range(1));
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EnsembleParallel)
    ->ArgsProduct({{32}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
