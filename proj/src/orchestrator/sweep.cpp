#include <exception>

#include "dsegym/error.hpp"
#include "dsegym/orchestrator.hpp"

namespace dsegym {

namespace {

void cartesian(const std::vector<std::pair<std::string, std::vector<double>>>& axes, std::size_t axis,
               HyperparamSet& current, std::vector<HyperparamSet>& out) {
  if (axis == axes.size()) {
    out.push_back(current);
    return;
  }
  for (double v : axes[axis].second) {
    current.set(axes[axis].first, v);
    cartesian(axes, axis + 1, current, out);
  }
}

}  // namespace

AgentGrid AgentGrid::from_json(const Json& doc) {
  AgentGrid grid;
  try {
    grid.agent_type = doc.at("agent").get<std::string>();
    grid.name = doc.value("name", grid.agent_type);
    HyperparamSet fixed;
    if (doc.contains("fixed")) fixed = HyperparamSet::from_json(doc.at("fixed"));
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    if (doc.contains("grid")) {
      for (const auto& [name, values] : doc.at("grid").items()) {
        std::vector<double> vs;
        for (const auto& v : values) vs.push_back(v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.get<double>());
        if (vs.empty()) throw InvalidArgument("grid axis '" + name + "' is empty");
        axes.emplace_back(name, std::move(vs));
      }
    }
    cartesian(axes, 0, fixed, grid.configs);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed agent grid: ") + e.what());
  }
  for (const auto& c : grid.configs) resolve_hyperparams(grid.agent_type, c);
  return grid;
}

AgentGrid AgentGrid::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

SweepSummary run_sweep(const SweepSpec& spec) {
  if (spec.grids.empty()) throw InvalidArgument("sweep needs at least one agent grid");
  if (spec.budgets.empty()) throw InvalidArgument("sweep needs at least one budget");
  if (spec.parallelism < 1) throw InvalidArgument("parallelism must be >= 1");

  struct Task {
    std::size_t grid;
    ExperimentConfig config;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < spec.grids.size(); ++g) {
    const auto& grid = spec.grids[g];
    if (grid.configs.empty()) throw InvalidArgument("agent grid '" + grid.name + "' has no configs");
    for (const auto& hp : grid.configs) {
      for (auto budget : spec.budgets) {
        ExperimentConfig c = spec.base;
        c.agent_type = grid.agent_type;
        c.hyperparams = hp;
        c.sample_budget = budget;
        c.validate();
        for (auto seed : c.seeds) tasks.push_back({g, c, seed});
      }
    }
  }
  if (!spec.base.output_dir.empty()) std::filesystem::create_directories(spec.base.output_dir);

  std::vector<TrialResult> results(tasks.size());
  auto run_task = [&](std::size_t i) {
    const auto& task = tasks[i];
    auto& out = results[i];
    try {
      out = run_trial(task.config, task.seed);
    } catch (const std::exception& e) {
      out = TrialResult{};
      out.env_id = task.config.env_id;
      out.workload_id = task.config.workload_id;
      out.objective = task.config.objective;
      out.agent_type = task.config.agent_type;
      out.hyperparams = resolve_hyperparams(task.config.agent_type, task.config.hyperparams);
      out.hyperparam_digest = out.hyperparams.digest();
      out.seed = task.seed;
      out.sample_budget = task.config.sample_budget;
      out.failed = true;
      out.error = e.what();
    }
  };
  // parallelism 1 is the plain serial reference for the OpenMP schedule.
  if (spec.parallelism == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    const auto n = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for num_threads(spec.parallelism) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) run_task(static_cast<std::size_t>(i));
  }

  std::vector<std::string> names;
  names.reserve(tasks.size());
  for (const auto& t : tasks) names.push_back(spec.grids[t.grid].name);
  return summarize(std::move(results), std::move(names));
}

}  // namespace dsegym
