// Serial reference against the OpenMP path for each parallel kernel.
#include <benchmark/benchmark.h>

#include "dsegym/dsegym.hpp"

using namespace dsegym;

namespace {

const ParameterSpace& dram_space() {
  static const ParameterSpace space = EnvFixture::load("dram-small").space();
  return space;
}

const Dataset& training_data() {
  static const Dataset data = [] {
    ExperimentConfig cfg;
    cfg.workload_id = "stream";
    cfg.sample_budget = 4000;
    cfg.stop_when_exhausted = false;
    Dataset d;
    for (auto& r : run_trial(cfg, 1).records) d.push_back(std::move(r));
    return d;
  }();
  return data;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_ForestTraining(benchmark::State& state) {
  const auto& data = training_data();
  ForestParams params;
  params.n_trees = 32;
  for (auto _ : state) {
    Rng rng(7);
    benchmark::DoNotOptimize(train_forest(data, dram_space(), "latency", params, rng, mode(state)));
  }
}

void BM_BatchPrediction(benchmark::State& state) {
  Rng rng(8);
  static const RandomForest forest = train_forest(training_data(), dram_space(), "latency", ForestParams{}, rng);
  static const TrainingRows rows = rows_from_dataset(training_data(), dram_space(), "latency");
  for (auto _ : state) benchmark::DoNotOptimize(forest.predict_batch(rows, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
}

void BM_OracleEnumeration(benchmark::State& state) {
  const auto fixture = EnvFixture::load("dram-small");
  const auto model = make_cost_model(fixture);
  const auto wl = fixture.workload("stream");
  const auto spec = fixture.objective("stream", "low-latency");
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_optimum(*model, wl, spec, mode(state)));
}

void BM_SweepScheduling(benchmark::State& state) {
  SweepSpec spec;
  spec.base.workload_id = "stream";
  spec.base.seeds = {0, 1, 2, 3};
  spec.base.keep_records = false;
  spec.grids = {AgentGrid::load(data_dir() / "grids" / "rl.json")};
  spec.budgets = {200};
  spec.parallelism = state.range(0) == 0 ? 1 : std::max(2, max_threads());
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(spec));
}

}  // namespace

BENCHMARK(BM_ForestTraining)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchPrediction)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleEnumeration)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepScheduling)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
