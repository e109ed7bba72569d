#pragma once

#include <utility>
#include <vector>

#include "dsegym/agent.hpp"

namespace dsegym {

struct AcoState {
  // pheromone[parameter][value]
  std::vector<std::vector<double>> pheromone;
  double evaporation = 0.2;
  double deposit_scale = 1.0;
  double exploration = 0.1;
  double greediness = 1.0;
  double pheromone_floor = 1e-3;
  int ants = 8;

  // Every entry starts at 1.
  static AcoState initial(const ParameterSpace& space);
  void validate() const;
  // Selection probabilities for one parameter ignoring exploration: tau^beta normalized.
  std::vector<double> choice_probabilities(std::size_t parameter) const;
};

// Per parameter: uniform with probability `exploration`, else roulette on tau^beta.
DesignPoint aco_propose(const AcoState& state, Rng& rng);
// Evaporate everything (floored), then each ant deposits Q r/(1+r) on its values.
// Rewards must be non-negative.
AcoState aco_update(AcoState state, const std::vector<std::pair<DesignPoint, double>>& ants);

class AcoAgent final : public Agent {
 public:
  AcoAgent(AgentContext context, HyperparamSet hyperparams);

  std::string type() const override { return "aco"; }
  DesignPoint propose(Rng& rng) override;
  const AcoState& state() const noexcept { return state_; }

 private:
  void on_observe(const DesignPoint& point, double reward) override;

  AcoState state_;
  std::vector<std::pair<DesignPoint, double>> colony_;
};

}  // namespace dsegym
