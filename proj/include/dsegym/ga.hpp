#pragma once

#include <functional>
#include <vector>

#include "dsegym/agent.hpp"

namespace dsegym {

struct GaDomainOps {
  // Drop individuals that survived more than aging_limit generations.
  bool aging = false;
  int aging_limit = 5;
  // With probability growth_prob, add a mutated copy of the elite.
  bool growth = false;
  double growth_prob = 0.5;
  // Crossover cuts once along a freshly shuffled gene order.
  bool reordering = false;
};

struct GaIndividual {
  DesignPoint point;
  double fitness = 0.0;
  int age = 0;
};

struct GaState {
  std::vector<GaIndividual> population;
  std::size_t population_size = 32;
  double mutation_prob = 0.05;
  double crossover_prob = 0.9;
  int tournament_size = 2;
  GaDomainOps ops;
  int generation = 0;

  void validate() const;
  // Highest fitness; the earliest such individual on ties.
  const GaIndividual& elite() const;
};

// Tournament with replacement; ties go to the lower index.
std::size_t ga_tournament(const GaState& state, Rng& rng);
// Uniform crossover, or one-point over a shuffled gene order when reordering.
DesignPoint ga_crossover(const DesignPoint& a, const DesignPoint& b, bool reordering, Rng& rng);
// Each gene is redrawn (to a different value) with probability mutation_prob.
DesignPoint ga_mutate(const ParameterSpace& space, const DesignPoint& point, double mutation_prob, Rng& rng);

// Offspring for one generation: population_size - 1 children, plus the
// growth copy when it fires.
std::vector<DesignPoint> ga_breed(const GaState& state, const ParameterSpace& space, Rng& rng);
// Survivor selection over parents (aged by one) and evaluated offspring.
// Aging first removes over-age individuals other than the elite, then the
// worst are dropped until population_size remain.
GaState ga_merge(GaState state, const std::vector<GaIndividual>& offspring);

// One synchronous generation: breed, evaluate every child, merge.
GaState ga_generation(GaState state, const ParameterSpace& space,
                      const std::function<double(const DesignPoint&)>& evaluate, Rng& rng);

class GaAgent final : public Agent {
 public:
  GaAgent(AgentContext context, HyperparamSet hyperparams);

  std::string type() const override { return "ga"; }
  DesignPoint propose(Rng& rng) override;
  const GaState& state() const noexcept { return state_; }

 private:
  void on_observe(const DesignPoint& point, double reward) override;

  GaState state_;
  std::vector<DesignPoint> pending_;
  std::vector<GaIndividual> evaluated_;
  std::size_t next_ = 0;
};

}  // namespace dsegym
