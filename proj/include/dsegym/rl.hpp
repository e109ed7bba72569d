#pragma once

#include <utility>
#include <vector>

#include "dsegym/agent.hpp"

namespace dsegym {

// Factorized categorical policy: an independent softmax per parameter.
struct RlState {
  std::vector<std::vector<double>> logits;
  double learning_rate = 0.05;
  double entropy_weight = 0.0;
  double baseline_decay = 0.9;
  int batch_size = 8;
  double baseline = 0.0;
  bool baseline_ready = false;

  // All logits zero.
  static RlState initial(const ParameterSpace& space);
  void validate() const;
};

std::vector<double> softmax(const std::vector<double>& logits);
double log_probability(const RlState& state, const DesignPoint& point);
double policy_entropy(const std::vector<double>& logits);

// d/dlogits of sum_b advantage_b * log pi(point_b).
std::vector<std::vector<double>> policy_gradient(const RlState& state,
                                                 const std::vector<std::pair<DesignPoint, double>>& advantages);
// d/dlogits of the summed per-parameter entropy.
std::vector<std::vector<double>> entropy_gradient(const RlState& state);

DesignPoint rl_propose(const RlState& state, Rng& rng);
// Baseline <- EMA of the batch mean (seeded with the first batch mean), then
// one ascent step on policy_gradient + entropy_weight * entropy_gradient.
RlState rl_update(RlState state, const std::vector<std::pair<DesignPoint, double>>& batch);

class RlAgent final : public Agent {
 public:
  RlAgent(AgentContext context, HyperparamSet hyperparams);

  std::string type() const override { return "rl"; }
  DesignPoint propose(Rng& rng) override;
  const RlState& state() const noexcept { return state_; }

 private:
  void on_observe(const DesignPoint& point, double reward) override;

  RlState state_;
  std::vector<std::pair<DesignPoint, double>> batch_;
};

}  // namespace dsegym
