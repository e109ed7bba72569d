#pragma once

#include "dsegym/aco.hpp"
#include "dsegym/agent.hpp"
#include "dsegym/bo.hpp"
#include "dsegym/ga.hpp"
#include "dsegym/rl.hpp"

namespace dsegym {

// The random number generator is the whole policy.
DesignPoint rw_propose(const ParameterSpace& space, Rng& rng);

class RandomWalker final : public Agent {
 public:
  using Agent::Agent;

  std::string type() const override { return "rw"; }
  DesignPoint propose(Rng& rng) override { return rw_propose(space(), rng); }

 private:
  void on_observe(const DesignPoint&, double) override {}
};

}  // namespace dsegym
