#include <map>

#include "dsegym/agents.hpp"
#include "dsegym/error.hpp"

namespace dsegym {

namespace {

const std::map<std::string, HyperparamSet>& default_hyperparams() {
  static const std::map<std::string, HyperparamSet> defaults = {
      {"rw", {}},
      {"ga",
       {{"population_size", 32},
        {"mutation_prob", 0.05},
        {"crossover_prob", 0.9},
        {"tournament_size", 2},
        {"aging", 0},
        {"aging_limit", 5},
        {"growth", 0},
        {"growth_prob", 0.5},
        {"reordering", 0}}},
      {"aco",
       {{"evaporation", 0.2},
        {"deposit_scale", 1.0},
        {"exploration", 0.1},
        {"greediness", 1.0},
        {"pheromone_floor", 1e-3},
        {"ants", 8}}},
      {"bo",
       {{"length_scale", 0.3},
        {"signal_variance", 1.0},
        {"noise", 1e-6},
        {"xi", 0.01},
        {"candidate_pool", 128},
        {"initial_samples", 10},
        {"max_history", 64}}},
      {"rl", {{"learning_rate", 0.05}, {"entropy_weight", 0.0}, {"baseline_decay", 0.9}, {"batch_size", 8}}},
  };
  return defaults;
}

}  // namespace

DesignPoint rw_propose(const ParameterSpace& space, Rng& rng) { return sample_uniform(space, rng); }

std::vector<std::string> agent_types() { return {"rw", "ga", "aco", "bo", "rl"}; }

HyperparamSet resolve_hyperparams(const std::string& type, const HyperparamSet& given) {
  const auto& all = default_hyperparams();
  auto it = all.find(type);
  if (it == all.end()) throw InvalidArgument("unknown agent type '" + type + "'");
  HyperparamSet out = it->second;
  for (const auto& [name, value] : given.values()) {
    if (!out.contains(name)) throw InvalidArgument("agent '" + type + "' has no hyperparameter '" + name + "'");
    out.set(name, value);
  }
  return out;
}

std::unique_ptr<Agent> make_agent(const std::string& type, const HyperparamSet& hyperparams, AgentContext context) {
  auto hp = resolve_hyperparams(type, hyperparams);
  if (type == "rw") return std::make_unique<RandomWalker>(std::move(context), std::move(hp));
  if (type == "ga") return std::make_unique<GaAgent>(std::move(context), std::move(hp));
  if (type == "aco") return std::make_unique<AcoAgent>(std::move(context), std::move(hp));
  if (type == "bo") return std::make_unique<BoAgent>(std::move(context), std::move(hp));
  return std::make_unique<RlAgent>(std::move(context), std::move(hp));
}

}  // namespace dsegym
