#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsegym/core.hpp"
#include "dsegym/json_io.hpp"
#include "dsegym/rng.hpp"
#include "dsegym/spaces.hpp"

namespace dsegym {

// Named numeric hyperparameters. Flags are stored as 0/1.
class HyperparamSet {
 public:
  HyperparamSet() = default;
  HyperparamSet(std::initializer_list<std::pair<const std::string, double>> values);

  HyperparamSet& set(const std::string& name, double value);
  bool contains(const std::string& name) const { return values_.count(name) > 0; }
  double get(const std::string& name) const;
  double get_or(const std::string& name, double fallback) const;
  const std::map<std::string, double>& values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }

  // Hex SHA-256 of the canonical JSON form (keys sorted, round-trip doubles).
  std::string digest() const;
  // Eight leading hex digits of digest(), for file names.
  std::string short_digest() const { return digest().substr(0, 8); }

  Json to_json() const;
  static HyperparamSet from_json(const Json& doc);

  friend bool operator==(const HyperparamSet&, const HyperparamSet&) = default;

 private:
  std::map<std::string, double> values_;
};

struct BestSoFar {
  DesignPoint point;
  double reward = 0.0;
};

// What an agent may know about the environment it searches.
struct AgentContext {
  ParameterSpace space;
  RewardMode reward_mode = RewardMode::kTargetProximity;
};

// propose -> (environment) -> observe, strictly alternating.
class Agent {
 public:
  Agent(AgentContext context, HyperparamSet hyperparams);
  virtual ~Agent() = default;
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  virtual std::string type() const = 0;
  virtual DesignPoint propose(Rng& rng) = 0;

  // Records the reward for a point returned by the latest propose().
  void observe(const DesignPoint& point, double reward);

  const std::optional<BestSoFar>& best_so_far() const noexcept { return best_; }
  const HyperparamSet& hyperparams() const noexcept { return hyperparams_; }
  const ParameterSpace& space() const noexcept { return context_.space; }

 protected:
  virtual void on_observe(const DesignPoint& point, double reward) = 0;
  RewardMode reward_mode() const noexcept { return context_.reward_mode; }

 private:
  AgentContext context_;
  HyperparamSet hyperparams_;
  std::optional<BestSoFar> best_;
};

// "rw", "ga", "aco", "bo", "rl".
std::vector<std::string> agent_types();
// Hyperparameters filled in with the agent's defaults; unknown names throw.
HyperparamSet resolve_hyperparams(const std::string& type, const HyperparamSet& given);
std::unique_ptr<Agent> make_agent(const std::string& type, const HyperparamSet& hyperparams, AgentContext context);

}  // namespace dsegym
