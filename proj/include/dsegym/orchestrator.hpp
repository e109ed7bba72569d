#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsegym/agents.hpp"
#include "dsegym/dataset.hpp"
#include "dsegym/envs.hpp"
#include "dsegym/parallel.hpp"

namespace dsegym {

struct ExperimentConfig {
  std::string env_id = "dram-small";
  std::string workload_id;  // empty: the fixture's first workload
  std::string objective = "low-latency";
  std::string agent_type = "rw";
  HyperparamSet hyperparams;
  std::uint64_t sample_budget = 1000;
  std::vector<std::uint64_t> seeds = {0};
  std::chrono::microseconds step_delay{0};
  // Trajectory and trial files go here; empty keeps everything in memory.
  std::filesystem::path output_dir;
  // Stop once every point of an enumerable space has been visited.
  bool stop_when_exhausted = true;
  // Keep records in TrialResult when there is no output directory.
  bool keep_records = true;

  void validate() const;
  Json to_json() const;
  static ExperimentConfig from_json(const Json& doc);
};

// "{env}.{workload}.{agent}.{digest8}.b{budget}.s{seed}"
std::string experiment_id(const ExperimentConfig& config, const std::string& workload_id, std::uint64_t seed);

struct TrialResult {
  std::string experiment_id;
  std::string env_id;
  std::string workload_id;
  std::string objective;
  RewardMode reward_mode = RewardMode::kTargetProximity;
  std::string agent_type;
  HyperparamSet hyperparams;
  std::string hyperparam_digest;
  std::uint64_t seed = 0;
  std::uint64_t sample_budget = 0;
  std::uint64_t samples_used = 0;
  std::optional<BestSoFar> best;
  NamedDesign best_design;
  bool exhausted = false;
  bool failed = false;
  std::string error;
  double wall_seconds = 0.0;
  std::filesystem::path trajectory_file;
  // Kept only when the config has no output directory.
  std::vector<TrajectoryRecord> records;

  Json to_json() const;
  // best->point is left empty; best_design keeps the named form.
  static TrialResult from_json(const Json& doc);
};

// propose -> step -> observe for sample_budget steps (fewer if the space is
// exhausted or the environment fails). Environment failures end the trial
// with failed = true and the partial trajectory kept.
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed);

// Every config of one agent type: fixed values plus the Cartesian product of
// the grid axes (last axis varies fastest).
struct AgentGrid {
  std::string name;  // label in summaries; defaults to the agent type
  std::string agent_type;
  std::vector<HyperparamSet> configs;

  static AgentGrid from_json(const Json& doc);
  static AgentGrid load(const std::filesystem::path& path);
};

struct SweepSpec {
  ExperimentConfig base;  // agent_type, hyperparams and sample_budget are ignored
  std::vector<AgentGrid> grids;
  std::vector<std::uint64_t> budgets;
  int parallelism = 1;
};

struct Quartiles {
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

struct FiveNumberSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double iqr() const noexcept { return q3 - q1; }
};

// Linear interpolation at position q * (n - 1) of the sorted values.
double quantile(std::span<const double> values, double q);
Quartiles interquartile_range(std::span<const double> values);
FiveNumberSummary five_number_summary(std::span<const double> values);

struct ConfigSummary {
  std::string grid;
  std::string agent_type;
  std::string digest;
  HyperparamSet hyperparams;
  std::uint64_t budget = 0;
  std::vector<double> best_rewards;  // one per successful seed, in seed order
  double mean_best = 0.0;
};

struct GridSummary {
  std::string grid;
  std::string agent_type;
  std::uint64_t budget = 0;
  std::size_t configs = 0;
  FiveNumberSummary spread;  // over the configs' mean best rewards
  std::string best_digest;
  double best_reward = 0.0;
};

struct SweepSummary {
  std::string env_id;
  std::string workload_id;
  std::string objective;
  std::vector<TrialResult> trials;  // sorted by (grid, digest, budget, seed)
  std::vector<std::string> trial_grids;  // grid name of each trial
  std::vector<ConfigSummary> configs;
  std::vector<GridSummary> grids;
  std::optional<std::size_t> best_trial;
  std::size_t failed_trials = 0;
};

SweepSummary run_sweep(const SweepSpec& spec);
// Summary statistics over already-run trials (also used by `report`).
SweepSummary summarize(std::vector<TrialResult> trials, std::vector<std::string> trial_grids);
// {"trials": [TrialResult json + "grid"]}; reading it back re-runs summarize.
Json sweep_to_json(const SweepSummary& summary);
SweepSummary sweep_from_json(const Json& doc);

struct NormalizedReward {
  std::string agent;
  std::uint64_t budget = 0;
  double mean = 0.0;
  std::size_t trials = 0;
};

struct NormalizedRewardTable {
  std::vector<NormalizedReward> rows;
  std::vector<std::string> warnings;
};

// Each trial's best reward over the largest best reward of ANY agent at the
// same (env, workload, budget), averaged per (agent, budget). Budget-distance
// scores are mapped through positive_reward first. `agent_names` labels each
// trial (defaults to its agent type).
NormalizedRewardTable mean_normalized_reward(std::span<const TrialResult> trials,
                                             std::span<const std::string> agent_names = {});

// quartiles.csv, normalized_reward.csv, time_to_completion.csv, trials.csv.
std::vector<std::filesystem::path> write_report(const SweepSummary& summary, const std::filesystem::path& out_dir);

struct OracleResult {
  std::uint64_t points = 0;
  std::uint64_t best_rank = 0;
  DesignPoint best_point;
  double best_reward = 0.0;
  std::uint64_t infeasible = 0;
};

// Reward of every point, indexed by rank.
std::vector<double> enumerate_rewards(const CostModel& model, const WorkloadSpec& workload, const RewardSpec& spec,
                                      Execution exec = Execution::kParallel);
// Exhaustive optimum; ties go to the lowest rank.
OracleResult brute_force_optimum(const CostModel& model, const WorkloadSpec& workload, const RewardSpec& spec,
                                 Execution exec = Execution::kParallel);
OracleResult brute_force_optimum(const std::string& env_id, const std::string& workload_id,
                                 const std::string& objective, Execution exec = Execution::kParallel);

}  // namespace dsegym
