#include <algorithm>
#include <numeric>

#include "dsegym/error.hpp"
#include "dsegym/ga.hpp"

namespace dsegym {

void GaState::validate() const {
  if (population_size < 2) throw InvalidArgument("GA population_size must be >= 2");
  if (mutation_prob < 0.0 || mutation_prob > 1.0) throw InvalidArgument("GA mutation_prob must be in [0,1]");
  if (crossover_prob < 0.0 || crossover_prob > 1.0) throw InvalidArgument("GA crossover_prob must be in [0,1]");
  if (tournament_size < 2) throw InvalidArgument("GA tournament_size must be >= 2");
  if (ops.aging_limit < 0) throw InvalidArgument("GA aging_limit must be >= 0");
  if (ops.growth_prob < 0.0 || ops.growth_prob > 1.0) throw InvalidArgument("GA growth_prob must be in [0,1]");
}

const GaIndividual& GaState::elite() const {
  if (population.empty()) throw InvalidArgument("GA population is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (population[i].fitness > population[best].fitness) best = i;
  }
  return population[best];
}

std::size_t ga_tournament(const GaState& state, Rng& rng) {
  std::size_t winner = rng.below(state.population.size());
  for (int k = 1; k < state.tournament_size; ++k) {
    const std::size_t c = rng.below(state.population.size());
    const auto& cf = state.population[c].fitness;
    const auto& wf = state.population[winner].fitness;
    if (cf > wf || (cf == wf && c < winner)) winner = c;
  }
  return winner;
}

DesignPoint ga_crossover(const DesignPoint& a, const DesignPoint& b, bool reordering, Rng& rng) {
  if (a.index.size() != b.index.size()) throw InvalidArgument("crossover parents differ in length");
  DesignPoint child = a;
  const std::size_t n = a.index.size();
  if (!reordering) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5)) child.index[i] = b.index[i];
    }
    return child;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t cut = n <= 1 ? 0 : 1 + rng.below(n - 1);
  for (std::size_t k = cut; k < n; ++k) child.index[order[k]] = b.index[order[k]];
  return child;
}

DesignPoint ga_mutate(const ParameterSpace& space, const DesignPoint& point, double mutation_prob, Rng& rng) {
  DesignPoint out = point;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (rng.bernoulli(mutation_prob)) out = resample_parameter(space, out, i, rng);
  }
  return out;
}

std::vector<DesignPoint> ga_breed(const GaState& state, const ParameterSpace& space, Rng& rng) {
  state.validate();
  if (state.population.size() != state.population_size) throw InvalidArgument("GA population not fully evaluated");
  std::vector<DesignPoint> children;
  children.reserve(state.population_size);
  for (std::size_t c = 0; c + 1 < state.population_size; ++c) {
    const auto& mother = state.population[ga_tournament(state, rng)].point;
    const auto& father = state.population[ga_tournament(state, rng)].point;
    DesignPoint child =
        rng.bernoulli(state.crossover_prob) ? ga_crossover(mother, father, state.ops.reordering, rng) : mother;
    children.push_back(ga_mutate(space, child, state.mutation_prob, rng));
  }
  if (state.ops.growth && rng.bernoulli(state.ops.growth_prob)) {
    children.push_back(neighbor(space, state.elite().point, rng));
  }
  return children;
}

GaState ga_merge(GaState state, const std::vector<GaIndividual>& offspring) {
  state.validate();
  std::vector<GaIndividual> pool;
  pool.reserve(state.population.size() + offspring.size());
  for (auto ind : state.population) {
    ++ind.age;
    pool.push_back(std::move(ind));
  }
  for (auto ind : offspring) {
    ind.age = 0;
    pool.push_back(std::move(ind));
  }
  if (pool.empty()) throw InvalidArgument("GA merge of empty populations");

  std::size_t elite = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (pool[i].fitness > pool[elite].fitness) elite = i;
  }

  // Survivors ordered best first; ties keep parents ahead of children.
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pool[x].fitness > pool[y].fitness; });

  std::vector<bool> keep(pool.size(), true);
  std::size_t alive = pool.size();
  if (state.ops.aging) {
    // Remove the worst over-age individuals first, never below the target size.
    for (auto it = order.rbegin(); it != order.rend() && alive > state.population_size; ++it) {
      if (*it != elite && pool[*it].age > state.ops.aging_limit) {
        keep[*it] = false;
        --alive;
      }
    }
  }
  std::vector<GaIndividual> next;
  next.reserve(state.population_size);
  for (auto idx : order) {
    if (keep[idx] && next.size() < state.population_size) next.push_back(pool[idx]);
  }
  state.population = std::move(next);
  ++state.generation;
  return state;
}

GaState ga_generation(GaState state, const ParameterSpace& space,
                      const std::function<double(const DesignPoint&)>& evaluate, Rng& rng) {
  const auto children = ga_breed(state, space, rng);
  std::vector<GaIndividual> offspring;
  offspring.reserve(children.size());
  for (const auto& child : children) offspring.push_back({child, evaluate(child), 0});
  return ga_merge(std::move(state), offspring);
}

GaAgent::GaAgent(AgentContext context, HyperparamSet hyperparams) : Agent(std::move(context), std::move(hyperparams)) {
  const auto& hp = this->hyperparams();
  state_.population_size = static_cast<std::size_t>(hp.get("population_size"));
  state_.mutation_prob = hp.get("mutation_prob");
  state_.crossover_prob = hp.get("crossover_prob");
  state_.tournament_size = static_cast<int>(hp.get("tournament_size"));
  state_.ops.aging = hp.get("aging") != 0.0;
  state_.ops.aging_limit = static_cast<int>(hp.get("aging_limit"));
  state_.ops.growth = hp.get("growth") != 0.0;
  state_.ops.growth_prob = hp.get("growth_prob");
  state_.ops.reordering = hp.get("reordering") != 0.0;
  state_.validate();
}

DesignPoint GaAgent::propose(Rng& rng) {
  if (state_.population.size() < state_.population_size) return sample_uniform(space(), rng);
  if (next_ == pending_.size()) {
    pending_ = ga_breed(state_, space(), rng);
    evaluated_.clear();
    next_ = 0;
  }
  return pending_[next_];
}

void GaAgent::on_observe(const DesignPoint& point, double reward) {
  if (state_.population.size() < state_.population_size) {
    state_.population.push_back({point, reward, 0});
    return;
  }
  evaluated_.push_back({point, reward, 0});
  ++next_;
  if (next_ == pending_.size()) {
    state_ = ga_merge(std::move(state_), evaluated_);
    pending_.clear();
    evaluated_.clear();
    next_ = 0;
  }
}

}  // namespace dsegym
