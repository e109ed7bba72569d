// Command-line front end: single trials, sweeps, dataset plumbing, proxy
// models and the brute-force oracle.
#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "dsegym/dsegym.hpp"

namespace {

using namespace dsegym;

constexpr int kUsageError = 1;
constexpr int kTrialFailure = 2;

// Bad flags or inputs that the user can fix.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected NAME=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

double parse_double(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw UsageError("not a number: '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("not a number: '" + text + "'");
  }
}

HyperparamSet parse_hyperparams(const std::vector<std::string>& assignments) {
  HyperparamSet hp;
  for (const auto& a : assignments) {
    const auto [name, value] = split_assignment(a);
    hp.set(name, parse_double(value));
  }
  return hp;
}

struct EnvFlags {
  std::string env = "dram-small";
  std::string workload;
  std::string objective = "low-latency";
  double delay_ms = 0.0;

  void add(CLI::App& cmd) {
    cmd.add_option("--env", env, "environment id, e.g. dram-small")->capture_default_str();
    cmd.add_option("--workload", workload, "workload id (default: the first one)");
    cmd.add_option("--objective", objective, "named objective of the workload")->capture_default_str();
    cmd.add_option("--delay-ms", delay_ms, "artificial per-step delay")->check(CLI::NonNegativeNumber);
  }

  std::chrono::microseconds delay() const { return std::chrono::microseconds(std::llround(delay_ms * 1000.0)); }

  EnvRequest request(std::uint64_t seed = 0) const {
    EnvRequest r;
    r.env_id = env;
    r.workload_id = workload;
    r.objective = objective;
    r.options.step_delay = delay();
    r.options.seed = seed;
    return r;
  }
};

void print(const Json& doc) { std::cout << doc.dump(2) << "\n"; }

int cmd_run(const EnvFlags& env, const std::string& agent, const std::vector<std::string>& hp, std::uint64_t budget,
            const std::vector<std::uint64_t>& seeds, const std::string& out) {
  ExperimentConfig c;
  c.env_id = env.env;
  c.workload_id = env.workload;
  c.objective = env.objective;
  c.agent_type = agent;
  c.hyperparams = parse_hyperparams(hp);
  c.sample_budget = budget;
  c.seeds = seeds;
  c.step_delay = env.delay();
  c.output_dir = out;
  c.keep_records = false;
  c.validate();
  int status = 0;
  for (auto seed : c.seeds) {
    const auto result = run_trial(c, seed);
    print(result.to_json());
    if (result.failed) status = kTrialFailure;
  }
  return status;
}

int cmd_sweep(const EnvFlags& env, const std::vector<std::string>& grid_files, const std::vector<std::uint64_t>& budgets,
              const std::vector<std::uint64_t>& seeds, int parallel, const std::string& out) {
  SweepSpec spec;
  spec.base.env_id = env.env;
  spec.base.workload_id = env.workload;
  spec.base.objective = env.objective;
  spec.base.seeds = seeds;
  spec.base.step_delay = env.delay();
  spec.base.keep_records = false;
  if (!out.empty()) spec.base.output_dir = std::filesystem::path(out) / "trials";
  spec.budgets = budgets;
  spec.parallelism = parallel;
  for (const auto& f : grid_files) spec.grids.push_back(AgentGrid::load(f));
  const auto summary = run_sweep(spec);
  if (!out.empty()) {
    write_json_file(std::filesystem::path(out) / "summary.json", sweep_to_json(summary));
    for (const auto& p : write_report(summary, out)) std::cerr << "wrote " << p.string() << "\n";
  }
  Json doc;
  doc["trials"] = summary.trials.size();
  doc["failed_trials"] = summary.failed_trials;
  if (summary.best_trial) doc["best"] = summary.trials[*summary.best_trial].to_json();
  Json grids = Json::array();
  for (const auto& g : summary.grids) {
    grids.push_back({{"agent", g.grid},
                     {"budget", g.budget},
                     {"configs", g.configs},
                     {"min", g.spread.min},
                     {"q1", g.spread.q1},
                     {"median", g.spread.median},
                     {"q3", g.spread.q3},
                     {"max", g.spread.max},
                     {"iqr", g.spread.iqr()}});
  }
  doc["grids"] = std::move(grids);
  print(doc);
  return summary.failed_trials > 0 ? kTrialFailure : 0;
}

int cmd_aggregate(const std::string& in_dir, const std::string& out_file, const std::string& manifest_file) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(in_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no .jsonl trajectory files in " + in_dir);

  std::vector<Dataset> parts;
  std::vector<ManifestEntry> entries;
  for (const auto& f : files) {
    ManifestEntry entry;
    entry.file = f.filename().string();
    entry.experiment_id = f.stem().string();
    auto loaded = load_trajectory_file(f);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    entry.records = loaded.dataset.size();
    if (!loaded.dataset.empty()) entry.agent_type = loaded.dataset[0].agent_type;
    if (!loaded.warnings.empty()) entry.partial = true;
    auto sidecar = f;
    sidecar.replace_extension(".trial.json");
    if (std::filesystem::exists(sidecar)) {
      const auto trial = read_json_file(sidecar);
      if (trial.value("status", std::string{"complete"}) == "partial") {
        entry.partial = true;
        entry.error = trial.value("error", std::string{});
      }
    }
    entries.push_back(std::move(entry));
    parts.push_back(std::move(loaded.dataset));
  }
  const auto merged = merge(parts);
  save_dataset(merged, out_file);
  const auto manifest = manifest_to_json(entries, merged);
  if (!manifest_file.empty()) write_json_file(manifest_file, manifest);
  print(manifest);
  return 0;
}

int cmd_mix(const std::vector<std::string>& sources, const std::vector<std::string>& weights,
            const std::string& weights_file, std::size_t size, std::uint64_t seed, const std::string& out_file) {
  std::map<std::string, Dataset> per_agent;
  for (const auto& s : sources) {
    const auto [label, path] = split_assignment(s);
    per_agent[label] = load_trajectory_file(path).dataset;
  }
  std::map<std::string, double> proportions;
  if (!weights_file.empty()) {
    for (const auto& [k, v] : read_json_file(weights_file).at("proportions").items()) proportions[k] = v.get<double>();
  }
  for (const auto& w : weights) {
    const auto [label, value] = split_assignment(w);
    proportions[label] = parse_double(value);
  }
  Rng rng(seed);
  const auto mixed = sample_mixture(per_agent, proportions, size, rng);
  save_dataset(mixed, out_file);
  Json doc;
  doc["records"] = mixed.size();
  doc["agents"] = mixed.agent_counts();
  print(doc);
  return 0;
}

struct ProxyFlags {
  std::string data;
  std::string validation;
  std::string metric = "latency";
  std::string model;
  ForestParams forest;
  int search = 0;
  std::uint64_t seed = 0;
};

int cmd_train_proxy(const ProxyFlags& f, const std::string& env_id) {
  const auto space = EnvFixture::load(env_id).space();
  const auto train = load_trajectory_file(f.data).dataset;
  Rng rng(f.seed);
  Json doc;
  if (f.search > 0) {
    if (f.validation.empty()) throw UsageError("--search needs --validation");
    const auto val = load_trajectory_file(f.validation).dataset;
    auto result = proxy_hyperparam_search(train, val, space, f.metric, f.search, rng);
    result.model.save(f.model);
    doc["params"] = result.params.to_json();
    doc["validation_rmse"] = result.validation_rmse;
  } else {
    const auto model = train_forest(train, space, f.metric, f.forest, rng);
    model.save(f.model);
    doc["params"] = f.forest.to_json();
  }
  doc["model"] = f.model;
  doc["n_train"] = train.size();
  print(doc);
  return 0;
}

int cmd_eval_proxy(const std::string& model_file, const std::string& data) {
  const auto model = RandomForest::load(model_file);
  const auto report = evaluate_rmse(model, load_trajectory_file(data).dataset);
  Json doc;
  doc["metric"] = model.target_metric();
  doc["rmse"] = report.rmse;
  doc["normalized_rmse_percent"] = report.normalized_rmse_percent;
  doc["n_train"] = report.n_train;
  doc["n_test"] = report.n_test;
  doc["test_agents"] = report.test_agents;
  print(doc);
  return 0;
}

int cmd_bench_proxy(const std::string& model_file, const EnvFlags& env, std::size_t queries, std::uint64_t seed) {
  const auto model = RandomForest::load(model_file);
  auto gym = make_environment(env.request(seed));
  if (!(gym->space() == model.space())) throw UsageError("model space does not match --env");
  Rng rng(seed);
  std::vector<DesignPoint> points;
  for (std::size_t i = 0; i < queries; ++i) points.push_back(sample_uniform(gym->space(), rng));
  const auto r = speed_benchmark(model, *gym, points);
  Json doc;
  doc["queries"] = r.queries;
  doc["env_seconds"] = r.baseline_seconds;
  doc["proxy_seconds"] = r.candidate_seconds;
  doc["speedup"] = r.speedup;
  print(doc);
  return 0;
}

int cmd_report(const std::string& summary_file, const std::string& trials_dir, const std::string& out) {
  SweepSummary summary;
  if (!summary_file.empty()) {
    summary = sweep_from_json(read_json_file(summary_file));
  } else if (!trials_dir.empty()) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(trials_dir)) {
      const auto name = e.path().filename().string();
      if (name.size() > 11 && name.ends_with(".trial.json")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TrialResult> trials;
    for (const auto& f : files) trials.push_back(TrialResult::from_json(read_json_file(f)));
    summary = summarize(std::move(trials), {});
  } else {
    throw UsageError("report needs --summary or --trials");
  }
  for (const auto& p : write_report(summary, out)) std::cout << p.string() << "\n";
  return 0;
}

int cmd_oracle(const EnvFlags& env, bool serial) {
  const auto fixture = EnvFixture::load(env.env);
  const auto model = make_cost_model(fixture);
  const auto wid = env.workload.empty() ? fixture.workload_ids().front() : env.workload;
  const auto r = brute_force_optimum(*model, fixture.workload(wid), fixture.objective(wid, env.objective),
                                     serial ? Execution::kSerial : Execution::kParallel);
  Json doc;
  doc["env"] = env.env;
  doc["workload"] = wid;
  doc["objective"] = env.objective;
  doc["points"] = r.points;
  doc["infeasible"] = r.infeasible;
  doc["best_rank"] = r.best_rank;
  doc["best_reward"] = r.best_reward;
  doc["best_design"] = named_to_json(model->space().named(r.best_point));
  print(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-space exploration gym"};
  app.require_subcommand(1);

  EnvFlags env;
  std::string agent = "rw";
  std::vector<std::string> hp;
  std::uint64_t budget = 1000;
  std::vector<std::uint64_t> budgets;
  std::vector<std::uint64_t> seeds{0};
  std::vector<std::string> grids;
  std::string out;
  int parallel = 1;

  auto* run = app.add_subcommand("run", "run one trial per seed");
  env.add(*run);
  run->add_option("--agent", agent, "rw, ga, aco, bo or rl")->capture_default_str();
  run->add_option("--hp", hp, "hyperparameter NAME=VALUE (repeatable)");
  run->add_option("--budget", budget, "sample budget")->capture_default_str();
  run->add_option("--seed,--seeds", seeds, "trial seeds");
  run->add_option("--out", out, "directory for trajectory files");

  auto* sweep = app.add_subcommand("sweep", "grid sweep over agents, budgets and seeds");
  env.add(*sweep);
  sweep->add_option("--grid", grids, "agent grid file (repeatable)")->required();
  sweep->add_option("--budget,--budgets", budgets, "sample budgets")->required();
  sweep->add_option("--seed,--seeds", seeds, "trial seeds");
  sweep->add_option("--parallel", parallel, "concurrent trials")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output directory for trials, summary and report");

  std::string in_dir, manifest;
  auto* aggregate = app.add_subcommand("aggregate", "merge trajectory files into one dataset");
  aggregate->add_option("--in", in_dir, "directory of .jsonl trajectories")->required();
  aggregate->add_option("--out", out, "merged dataset file")->required();
  aggregate->add_option("--manifest", manifest, "manifest file");

  std::vector<std::string> sources, weights;
  std::string weights_file;
  std::size_t size = 0;
  std::uint64_t seed = 0;
  auto* mix = app.add_subcommand("mix", "sample a mixed-agent dataset");
  mix->add_option("--source", sources, "LABEL=dataset.jsonl (repeatable)")->required();
  mix->add_option("--weight", weights, "LABEL=proportion (repeatable)");
  mix->add_option("--weights", weights_file, "mixture file with a \"proportions\" object");
  mix->add_option("--size", size, "records in the mixture")->required();
  mix->add_option("--seed", seed, "sampling seed");
  mix->add_option("--out", out, "output dataset file")->required();

  ProxyFlags proxy;
  auto* train = app.add_subcommand("train-proxy", "fit a random-forest proxy to one metric");
  train->add_option("--env", env.env, "environment id the data came from")->capture_default_str();
  train->add_option("--data", proxy.data, "training dataset")->required();
  train->add_option("--metric", proxy.metric, "target metric")->capture_default_str();
  train->add_option("--trees", proxy.forest.n_trees, "trees in the forest")->capture_default_str();
  train->add_option("--max-depth", proxy.forest.tree.max_depth, "-1 for unlimited")->capture_default_str();
  train->add_option("--min-leaf", proxy.forest.tree.min_samples_leaf, "min samples per leaf")->capture_default_str();
  train->add_option("--feature-subsample", proxy.forest.tree.feature_subsample, "features tried per split")
      ->capture_default_str();
  train->add_option("--search", proxy.search, "random-search trials (0: use the flags above)");
  train->add_option("--validation", proxy.validation, "validation dataset for --search");
  train->add_option("--seed", proxy.seed, "training seed");
  train->add_option("--model", proxy.model, "output model file")->required();

  std::string data;
  auto* eval = app.add_subcommand("eval-proxy", "RMSE of a proxy on a test dataset");
  eval->add_option("--model", proxy.model, "model file")->required();
  eval->add_option("--data", data, "test dataset")->required();

  std::size_t queries = 100;
  auto* bench = app.add_subcommand("bench-proxy", "proxy vs environment query time");
  env.add(*bench);
  bench->add_option("--model", proxy.model, "model file")->required();
  bench->add_option("--queries", queries, "random design queries")->capture_default_str();
  bench->add_option("--seed", seed, "query seed");

  std::string summary_file, trials_dir;
  auto* report = app.add_subcommand("report", "write CSV tables from a sweep");
  report->add_option("--summary", summary_file, "summary.json written by sweep");
  report->add_option("--trials", trials_dir, "directory of .trial.json files");
  report->add_option("--out", out, "report directory")->required();

  bool serial = false;
  auto* oracle = app.add_subcommand("enumerate-oracle", "brute-force optimum of a small space");
  env.add(*oracle);
  oracle->add_flag("--serial", serial, "single-threaded enumeration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run) return cmd_run(env, agent, hp, budget, seeds, out);
    if (*sweep) return cmd_sweep(env, grids, budgets, seeds, parallel, out);
    if (*aggregate) return cmd_aggregate(in_dir, out, manifest);
    if (*mix) return cmd_mix(sources, weights, weights_file, size, seed, out);
    if (*train) return cmd_train_proxy(proxy, env.env);
    if (*eval) return cmd_eval_proxy(proxy.model, data);
    if (*bench) return cmd_bench_proxy(proxy.model, env, queries, seed);
    if (*report) return cmd_report(summary_file, trials_dir, out);
    if (*oracle) return cmd_oracle(env, serial);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTrialFailure;
  }
  return kUsageError;
}
