#include <algorithm>
#include <cmath>

#include "dsegym/error.hpp"
#include "dsegym/rl.hpp"

namespace dsegym {

RlState RlState::initial(const ParameterSpace& space) {
  RlState s;
  for (const auto& p : space.parameters()) s.logits.emplace_back(p.size(), 0.0);
  return s;
}

void RlState::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("RL learning_rate must be > 0");
  if (entropy_weight < 0.0) throw InvalidArgument("RL entropy_weight must be >= 0");
  if (baseline_decay < 0.0 || baseline_decay >= 1.0) throw InvalidArgument("RL baseline_decay must be in [0,1)");
  if (batch_size < 1) throw InvalidArgument("RL batch_size must be >= 1");
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw InvalidArgument("softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t v = 0; v < logits.size(); ++v) {
    p[v] = std::exp(logits[v] - peak);
    total += p[v];
  }
  for (auto& x : p) x /= total;
  return p;
}

double log_probability(const RlState& state, const DesignPoint& point) {
  double lp = 0.0;
  for (std::size_t i = 0; i < state.logits.size(); ++i) {
    const auto& z = state.logits[i];
    const double peak = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double x : z) total += std::exp(x - peak);
    lp += z.at(point.index.at(i)) - peak - std::log(total);
  }
  return lp;
}

double policy_entropy(const std::vector<double>& logits) {
  double h = 0.0;
  for (double p : softmax(logits)) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<std::vector<double>> policy_gradient(const RlState& state,
                                                 const std::vector<std::pair<DesignPoint, double>>& advantages) {
  std::vector<std::vector<double>> grad;
  std::vector<std::vector<double>> probs;
  for (const auto& z : state.logits) {
    grad.emplace_back(z.size(), 0.0);
    probs.push_back(softmax(z));
  }
  for (const auto& [point, adv] : advantages) {
    if (point.index.size() != state.logits.size()) throw InvalidArgument("sample has the wrong number of parameters");
    for (std::size_t i = 0; i < state.logits.size(); ++i) {
      for (std::size_t v = 0; v < probs[i].size(); ++v) grad[i][v] -= adv * probs[i][v];
      grad[i].at(point.index[i]) += adv;
    }
  }
  return grad;
}

std::vector<std::vector<double>> entropy_gradient(const RlState& state) {
  std::vector<std::vector<double>> grad;
  for (const auto& z : state.logits) {
    const auto p = softmax(z);
    const double h = policy_entropy(z);
    std::vector<double> g(z.size());
    for (std::size_t v = 0; v < z.size(); ++v) g[v] = p[v] > 0.0 ? -p[v] * (std::log(p[v]) + h) : 0.0;
    grad.push_back(std::move(g));
  }
  return grad;
}

DesignPoint rl_propose(const RlState& state, Rng& rng) {
  DesignPoint point;
  point.index.resize(state.logits.size());
  for (std::size_t i = 0; i < state.logits.size(); ++i) {
    const auto p = softmax(state.logits[i]);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = p.size() - 1;
    for (std::size_t v = 0; v < p.size(); ++v) {
      acc += p[v];
      if (u < acc) {
        pick = v;
        break;
      }
    }
    point.index[i] = static_cast<std::uint32_t>(pick);
  }
  return point;
}

RlState rl_update(RlState state, const std::vector<std::pair<DesignPoint, double>>& batch) {
  state.validate();
  if (batch.empty()) throw InvalidArgument("rl_update needs a non-empty batch");
  double mean = 0.0;
  for (const auto& [point, reward] : batch) mean += reward;
  mean /= static_cast<double>(batch.size());
  if (!state.baseline_ready) {
    state.baseline = mean;
    state.baseline_ready = true;
  } else {
    state.baseline = state.baseline_decay * state.baseline + (1.0 - state.baseline_decay) * mean;
  }

  std::vector<std::pair<DesignPoint, double>> advantages;
  advantages.reserve(batch.size());
  for (const auto& [point, reward] : batch) advantages.emplace_back(point, reward - state.baseline);
  const auto pg = policy_gradient(state, advantages);
  const auto eg = entropy_gradient(state);
  for (std::size_t i = 0; i < state.logits.size(); ++i) {
    for (std::size_t v = 0; v < state.logits[i].size(); ++v) {
      state.logits[i][v] += state.learning_rate * (pg[i][v] + state.entropy_weight * eg[i][v]);
    }
  }
  return state;
}

RlAgent::RlAgent(AgentContext context, HyperparamSet hyperparams) : Agent(std::move(context), std::move(hyperparams)) {
  state_ = RlState::initial(space());
  const auto& hp = this->hyperparams();
  state_.learning_rate = hp.get("learning_rate");
  state_.entropy_weight = hp.get("entropy_weight");
  state_.baseline_decay = hp.get("baseline_decay");
  state_.batch_size = static_cast<int>(hp.get("batch_size"));
  state_.validate();
}

DesignPoint RlAgent::propose(Rng& rng) { return rl_propose(state_, rng); }

void RlAgent::on_observe(const DesignPoint& point, double reward) {
  batch_.emplace_back(point, reward);
  if (batch_.size() == static_cast<std::size_t>(state_.batch_size)) {
    state_ = rl_update(std::move(state_), batch_);
    batch_.clear();
  }
}

}  // namespace dsegym
