#include <algorithm>
#include <cmath>

#include "dsegym/aco.hpp"
#include "dsegym/error.hpp"

namespace dsegym {

AcoState AcoState::initial(const ParameterSpace& space) {
  AcoState s;
  for (const auto& p : space.parameters()) s.pheromone.emplace_back(p.size(), 1.0);
  return s;
}

void AcoState::validate() const {
  if (!(evaporation > 0.0 && evaporation < 1.0)) throw InvalidArgument("ACO evaporation must be in (0,1)");
  if (!(deposit_scale > 0.0)) throw InvalidArgument("ACO deposit_scale must be > 0");
  if (exploration < 0.0 || exploration > 1.0) throw InvalidArgument("ACO exploration must be in [0,1]");
  if (greediness < 0.0) throw InvalidArgument("ACO greediness must be >= 0");
  if (!(pheromone_floor > 0.0)) throw InvalidArgument("ACO pheromone_floor must be > 0");
  if (ants < 1) throw InvalidArgument("ACO ants must be >= 1");
}

std::vector<double> AcoState::choice_probabilities(std::size_t parameter) const {
  const auto& tau = pheromone.at(parameter);
  std::vector<double> w(tau.size());
  double total = 0.0;
  for (std::size_t v = 0; v < tau.size(); ++v) {
    w[v] = std::pow(tau[v], greediness);
    total += w[v];
  }
  for (auto& x : w) x /= total;
  return w;
}

DesignPoint aco_propose(const AcoState& state, Rng& rng) {
  DesignPoint point;
  point.index.resize(state.pheromone.size());
  for (std::size_t i = 0; i < state.pheromone.size(); ++i) {
    const auto n = state.pheromone[i].size();
    if (rng.bernoulli(state.exploration)) {
      point.index[i] = static_cast<std::uint32_t>(rng.below(n));
      continue;
    }
    const auto probs = state.choice_probabilities(i);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = n - 1;
    for (std::size_t v = 0; v < n; ++v) {
      acc += probs[v];
      if (u < acc) {
        pick = v;
        break;
      }
    }
    point.index[i] = static_cast<std::uint32_t>(pick);
  }
  return point;
}

AcoState aco_update(AcoState state, const std::vector<std::pair<DesignPoint, double>>& ants) {
  state.validate();
  for (const auto& [point, reward] : ants) {
    if (!(reward >= 0.0) || !std::isfinite(reward)) throw InvalidArgument("ACO rewards must be finite and >= 0");
    if (point.index.size() != state.pheromone.size()) throw InvalidArgument("ant path has the wrong length");
  }
  for (auto& tau : state.pheromone) {
    for (auto& t : tau) t = std::max(state.pheromone_floor, (1.0 - state.evaporation) * t);
  }
  for (const auto& [point, reward] : ants) {
    const double deposit = state.deposit_scale * reward / (1.0 + reward);
    for (std::size_t i = 0; i < point.index.size(); ++i) state.pheromone[i].at(point.index[i]) += deposit;
  }
  return state;
}

AcoAgent::AcoAgent(AgentContext context, HyperparamSet hyperparams) : Agent(std::move(context), std::move(hyperparams)) {
  state_ = AcoState::initial(space());
  const auto& hp = this->hyperparams();
  state_.evaporation = hp.get("evaporation");
  state_.deposit_scale = hp.get("deposit_scale");
  state_.exploration = hp.get("exploration");
  state_.greediness = hp.get("greediness");
  state_.pheromone_floor = hp.get("pheromone_floor");
  state_.ants = static_cast<int>(hp.get("ants"));
  state_.validate();
}

DesignPoint AcoAgent::propose(Rng& rng) { return aco_propose(state_, rng); }

void AcoAgent::on_observe(const DesignPoint& point, double reward) {
  colony_.emplace_back(point, positive_reward(reward_mode(), reward));
  if (colony_.size() == static_cast<std::size_t>(state_.ants)) {
    state_ = aco_update(std::move(state_), colony_);
    colony_.clear();
  }
}

}  // namespace dsegym
