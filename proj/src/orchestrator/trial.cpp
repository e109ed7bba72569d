#include <chrono>

#include "dsegym/error.hpp"
#include "dsegym/orchestrator.hpp"

namespace dsegym {

namespace {

// Spaces up to this size are tracked for exhaustion with one bit per point.
constexpr std::uint64_t kExhaustionTrackingLimit = std::uint64_t{1} << 26;

// Stream ids under the trial seed.
constexpr std::uint64_t kAgentStream = 1;

}  // namespace

void ExperimentConfig::validate() const {
  if (env_id.empty()) throw InvalidArgument("config needs an env_id");
  if (sample_budget < 1) throw InvalidArgument("sample_budget must be >= 1");
  if (seeds.empty()) throw InvalidArgument("config needs at least one seed");
  if (step_delay.count() < 0) throw InvalidArgument("step delay must be non-negative");
  resolve_hyperparams(agent_type, hyperparams);
}

Json ExperimentConfig::to_json() const {
  Json doc;
  doc["env"] = env_id;
  doc["workload"] = workload_id;
  doc["objective"] = objective;
  doc["agent"] = agent_type;
  doc["hyperparams"] = hyperparams.to_json();
  doc["budget"] = sample_budget;
  doc["seeds"] = seeds;
  doc["delay_us"] = step_delay.count();
  doc["out"] = output_dir.string();
  doc["stop_when_exhausted"] = stop_when_exhausted;
  return doc;
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
  ExperimentConfig c;
  try {
    c.env_id = doc.value("env", c.env_id);
    c.workload_id = doc.value("workload", c.workload_id);
    c.objective = doc.value("objective", c.objective);
    c.agent_type = doc.value("agent", c.agent_type);
    if (doc.contains("hyperparams")) c.hyperparams = HyperparamSet::from_json(doc.at("hyperparams"));
    c.sample_budget = doc.value("budget", c.sample_budget);
    if (doc.contains("seeds")) c.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    c.step_delay = std::chrono::microseconds(doc.value("delay_us", std::int64_t{0}));
    c.output_dir = doc.value("out", std::string{});
    c.stop_when_exhausted = doc.value("stop_when_exhausted", true);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string experiment_id(const ExperimentConfig& config, const std::string& workload_id, std::uint64_t seed) {
  const auto hp = resolve_hyperparams(config.agent_type, config.hyperparams);
  return config.env_id + "." + workload_id + "." + config.agent_type + "." + hp.short_digest() + ".b" +
         std::to_string(config.sample_budget) + ".s" + std::to_string(seed);
}

Json TrialResult::to_json() const {
  Json doc;
  doc["experiment_id"] = experiment_id;
  doc["env_id"] = env_id;
  doc["workload_id"] = workload_id;
  doc["objective"] = objective;
  doc["reward_mode"] = reward_mode_name(reward_mode);
  doc["agent_type"] = agent_type;
  doc["hyperparams"] = hyperparams.to_json();
  doc["hyperparam_digest"] = hyperparam_digest;
  doc["seed"] = seed;
  doc["sample_budget"] = sample_budget;
  doc["samples_used"] = samples_used;
  doc["best_reward"] = best ? Json(best->reward) : Json(nullptr);
  doc["best_design"] = named_to_json(best_design);
  doc["exhausted"] = exhausted;
  doc["status"] = failed ? "partial" : "complete";
  if (failed) doc["error"] = error;
  doc["wall_seconds"] = wall_seconds;
  doc["trajectory_file"] = trajectory_file.filename().string();
  return doc;
}

TrialResult TrialResult::from_json(const Json& doc) {
  TrialResult t;
  try {
    t.experiment_id = doc.at("experiment_id").get<std::string>();
    t.env_id = doc.at("env_id").get<std::string>();
    t.workload_id = doc.at("workload_id").get<std::string>();
    t.objective = doc.at("objective").get<std::string>();
    t.reward_mode = reward_mode_from_name(doc.at("reward_mode").get<std::string>());
    t.agent_type = doc.at("agent_type").get<std::string>();
    t.hyperparams = HyperparamSet::from_json(doc.at("hyperparams"));
    t.hyperparam_digest = doc.at("hyperparam_digest").get<std::string>();
    t.seed = doc.at("seed").get<std::uint64_t>();
    t.sample_budget = doc.at("sample_budget").get<std::uint64_t>();
    t.samples_used = doc.at("samples_used").get<std::uint64_t>();
    if (!doc.at("best_reward").is_null()) t.best = BestSoFar{{}, doc.at("best_reward").get<double>()};
    t.best_design = named_from_json(doc.at("best_design"));
    t.exhausted = doc.at("exhausted").get<bool>();
    t.failed = doc.at("status").get<std::string>() == "partial";
    t.error = doc.value("error", std::string{});
    t.wall_seconds = doc.at("wall_seconds").get<double>();
    t.trajectory_file = doc.value("trajectory_file", std::string{});
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed trial result: ") + e.what());
  }
  return t;
}

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  EnvRequest request;
  request.env_id = config.env_id;
  request.workload_id = config.workload_id;
  request.objective = config.objective;
  request.options.step_delay = config.step_delay;
  request.options.seed = seed;
  auto env = make_environment(request);

  TrialResult result;
  result.env_id = config.env_id;
  result.workload_id = env->workload().id;
  result.objective = config.objective;
  result.reward_mode = env->reward_spec().mode;
  result.agent_type = config.agent_type;
  result.hyperparams = resolve_hyperparams(config.agent_type, config.hyperparams);
  result.hyperparam_digest = result.hyperparams.digest();
  result.seed = seed;
  result.sample_budget = config.sample_budget;
  result.experiment_id = experiment_id(config, result.workload_id, seed);

  auto agent = make_agent(config.agent_type, result.hyperparams, {env->space(), env->reward_spec().mode});
  Rng rng = Rng(seed).split(kAgentStream);

  std::optional<TrajectoryWriter> writer;
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    result.trajectory_file = config.output_dir / (result.experiment_id + ".jsonl");
    // A rerun replaces the previous trajectory instead of extending it.
    std::filesystem::remove(result.trajectory_file);
    writer.emplace(result.trajectory_file);
  }
  const bool log = writer.has_value() || config.keep_records;

  const auto& space = env->space();
  const auto card = cardinality_u64(space);
  const bool track = config.stop_when_exhausted && card && *card <= kExhaustionTrackingLimit;
  std::vector<bool> visited(track ? *card : 0, false);
  std::uint64_t distinct = 0;

  TrajectoryRecord record;
  record.experiment_id = result.experiment_id;
  record.env_id = result.env_id;
  record.workload_id = result.workload_id;
  record.agent_type = agent_label(config.agent_type);
  record.hyperparam_digest = result.hyperparam_digest;
  record.seed = seed;

  env->reset();
  for (std::uint64_t step = 0; step < config.sample_budget; ++step) {
    const DesignPoint point = agent->propose(rng);
    StepResult outcome;
    try {
      outcome = env->step(point);
    } catch (const Error& e) {
      result.failed = true;
      result.error = e.what();
      break;
    }
    if (outcome.done) env->reset();
    agent->observe(point, outcome.reward);
    ++result.samples_used;

    if (log) {
      record.step_index = step;
      record.design = space.named(point);
      record.observation = to_metric_map(outcome.observation);
      record.reward = outcome.reward;
      record.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
      if (writer) {
        writer->append(record);
      } else {
        result.records.push_back(record);
      }
    }

    if (track) {
      const auto r = space.rank(point);
      if (!visited[r]) {
        visited[r] = true;
        if (++distinct == *card) {
          result.exhausted = true;
          break;
        }
      }
    }
  }

  result.best = agent->best_so_far();
  if (result.best) result.best_design = space.named(result.best->point);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.output_dir.empty()) {
    write_json_file(config.output_dir / (result.experiment_id + ".trial.json"), result.to_json());
  }
  return result;
}

}  // namespace dsegym
