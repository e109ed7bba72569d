// Every OpenMP kernel against its serial reference.
#include <gtest/gtest.h>

#include "support.hpp"

using namespace dsegym;

namespace {

Dataset rw_dataset(std::size_t n, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.workload_id = "stream";
  cfg.sample_budget = n;
  cfg.stop_when_exhausted = false;
  Dataset d;
  for (auto& r : run_trial(cfg, seed).records) d.push_back(std::move(r));
  return d;
}

}  // namespace

TEST(Parallel, ReportsAtLeastOneThread) { EXPECT_GE(max_threads(), 1); }

TEST(Parallel, ForestTrainingMatchesSerial) {
  const auto data = rw_dataset(800, 1);
  const auto space = EnvFixture::load("dram-small").space();
  ForestParams params;
  params.n_trees = 24;
  params.tree.feature_subsample = 0.6;
  for (std::uint64_t seed : {0u, 7u}) {
    Rng a(seed), b(seed);
    const auto serial = train_forest(data, space, "latency", params, a, Execution::kSerial);
    const auto parallel = train_forest(data, space, "latency", params, b, Execution::kParallel);
    EXPECT_EQ(serial.to_json(), parallel.to_json());
    EXPECT_EQ(a(), b());
  }
}

TEST(Parallel, BatchPredictionMatchesSerial) {
  const auto data = rw_dataset(600, 2);
  const auto space = EnvFixture::load("dram-small").space();
  Rng rng(3);
  const auto forest = train_forest(data, space, "energy", ForestParams{}, rng);
  const auto rows = rows_from_dataset(rw_dataset(2000, 4), space, "energy");
  EXPECT_EQ(forest.predict_batch(rows, Execution::kSerial), forest.predict_batch(rows, Execution::kParallel));
}

TEST(Parallel, OracleEnumerationMatchesSerial) {
  for (const char* env : {"dram-small", "accel-small", "soc-small"}) {
    const auto fixture = EnvFixture::load(env);
    const auto model = make_cost_model(fixture);
    const auto wid = fixture.workload_ids().front();
    for (const auto& obj : fixture.objective_names(wid)) {
      const auto spec = fixture.objective(wid, obj);
      const auto wl = fixture.workload(wid);
      EXPECT_EQ(enumerate_rewards(*model, wl, spec, Execution::kSerial),
                enumerate_rewards(*model, wl, spec, Execution::kParallel))
          << env << " " << obj;
      const auto s = brute_force_optimum(*model, wl, spec, Execution::kSerial);
      const auto p = brute_force_optimum(*model, wl, spec, Execution::kParallel);
      EXPECT_EQ(s.best_rank, p.best_rank);
      EXPECT_EQ(s.best_reward, p.best_reward);
      EXPECT_EQ(s.infeasible, p.infeasible);
    }
  }
}

TEST(Parallel, SweepSummariesMatchAcrossParallelism) {
  SweepSpec spec;
  spec.base.workload_id = "stream";
  spec.base.seeds = {0, 1};
  spec.base.keep_records = false;
  spec.grids = {AgentGrid::load(data_dir() / "grids" / "rl.json"), AgentGrid::load(data_dir() / "grids" / "rw.json")};
  spec.budgets = {40, 80};
  spec.parallelism = 1;
  const auto serial = run_sweep(spec);
  spec.parallelism = 8;
  const auto parallel = run_sweep(spec);
  ASSERT_EQ(serial.trials.size(), parallel.trials.size());
  for (std::size_t i = 0; i < serial.trials.size(); ++i) {
    EXPECT_EQ(serial.trials[i].experiment_id, parallel.trials[i].experiment_id);
    EXPECT_EQ(serial.trials[i].best->reward, parallel.trials[i].best->reward);
    EXPECT_EQ(serial.trials[i].best_design, parallel.trials[i].best_design);
  }
  ASSERT_EQ(serial.grids.size(), parallel.grids.size());
  for (std::size_t g = 0; g < serial.grids.size(); ++g) {
    EXPECT_EQ(serial.grids[g].spread.q1, parallel.grids[g].spread.q1);
    EXPECT_EQ(serial.grids[g].spread.q3, parallel.grids[g].spread.q3);
    EXPECT_EQ(serial.grids[g].best_digest, parallel.grids[g].best_digest);
  }
}
