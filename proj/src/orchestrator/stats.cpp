#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "dsegym/error.hpp"
#include "dsegym/orchestrator.hpp"

namespace dsegym {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::vector<double> sorted_copy(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("quantiles of an empty set");
  for (double v : values) {
    if (std::isnan(v)) throw InvalidArgument("quantiles of a set containing NaN");
  }
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

double quantile(std::span<const double> values, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile must be in [0,1]");
  return sorted_quantile(sorted_copy(values), q);
}

Quartiles interquartile_range(std::span<const double> values) {
  const auto s = sorted_copy(values);
  Quartiles q;
  q.q1 = sorted_quantile(s, 0.25);
  q.q3 = sorted_quantile(s, 0.75);
  q.iqr = q.q3 - q.q1;
  return q;
}

FiveNumberSummary five_number_summary(std::span<const double> values) {
  const auto s = sorted_copy(values);
  return {s.front(), sorted_quantile(s, 0.25), sorted_quantile(s, 0.5), sorted_quantile(s, 0.75), s.back()};
}

SweepSummary summarize(std::vector<TrialResult> trials, std::vector<std::string> trial_grids) {
  if (trial_grids.empty()) {
    for (const auto& t : trials) trial_grids.push_back(t.agent_type);
  }
  if (trial_grids.size() != trials.size()) throw InvalidArgument("one grid name per trial is required");

  // Deterministic fold: order by (grid, digest, budget, seed) whatever order the trials finished in.
  std::vector<std::size_t> order(trials.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](std::size_t i) {
    const auto& t = trials[i];
    return std::tie(trial_grids[i], t.hyperparam_digest, t.sample_budget, t.seed, t.experiment_id);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  SweepSummary summary;
  for (auto i : order) {
    summary.trials.push_back(std::move(trials[i]));
    summary.trial_grids.push_back(std::move(trial_grids[i]));
  }
  if (!summary.trials.empty()) {
    summary.env_id = summary.trials.front().env_id;
    summary.workload_id = summary.trials.front().workload_id;
    summary.objective = summary.trials.front().objective;
  }

  for (std::size_t i = 0; i < summary.trials.size(); ++i) {
    const auto& t = summary.trials[i];
    if (t.failed) ++summary.failed_trials;
    if (!t.best) continue;
    if (!summary.best_trial || t.best->reward > summary.trials[*summary.best_trial].best->reward) {
      summary.best_trial = i;
    }
    const auto& grid = summary.trial_grids[i];
    if (summary.configs.empty() || summary.configs.back().grid != grid ||
        summary.configs.back().digest != t.hyperparam_digest || summary.configs.back().budget != t.sample_budget) {
      ConfigSummary c;
      c.grid = grid;
      c.agent_type = t.agent_type;
      c.digest = t.hyperparam_digest;
      c.hyperparams = t.hyperparams;
      c.budget = t.sample_budget;
      summary.configs.push_back(std::move(c));
    }
    summary.configs.back().best_rewards.push_back(t.best->reward);
  }
  for (auto& c : summary.configs) {
    double sum = 0.0;
    for (double r : c.best_rewards) sum += r;
    c.mean_best = sum / static_cast<double>(c.best_rewards.size());
  }

  // Configs of one (grid, budget) are adjacent only per digest, so group explicitly.
  std::map<std::pair<std::string, std::uint64_t>, std::vector<const ConfigSummary*>> groups;
  std::vector<std::pair<std::string, std::uint64_t>> group_order;
  for (const auto& c : summary.configs) {
    auto k = std::make_pair(c.grid, c.budget);
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) group_order.push_back(k);
    it->second.push_back(&c);
  }
  std::sort(group_order.begin(), group_order.end());
  for (const auto& k : group_order) {
    const auto& members = groups.at(k);
    GridSummary g;
    g.grid = k.first;
    g.agent_type = members.front()->agent_type;
    g.budget = k.second;
    g.configs = members.size();
    std::vector<double> means;
    for (const auto* c : members) {
      means.push_back(c->mean_best);
      if (means.size() == 1 || c->mean_best > g.best_reward) {
        g.best_reward = c->mean_best;
        g.best_digest = c->digest;
      }
    }
    g.spread = five_number_summary(means);
    summary.grids.push_back(std::move(g));
  }
  return summary;
}

NormalizedRewardTable mean_normalized_reward(std::span<const TrialResult> trials,
                                             std::span<const std::string> agent_names) {
  if (!agent_names.empty() && agent_names.size() != trials.size()) {
    throw InvalidArgument("one agent name per trial is required");
  }
  using GroupKey = std::tuple<std::string, std::string, std::string, std::uint64_t>;
  auto group_of = [](const TrialResult& t) { return GroupKey{t.env_id, t.workload_id, t.objective, t.sample_budget}; };

  std::map<GroupKey, double> group_max;
  for (const auto& t : trials) {
    if (!t.best) continue;
    const double r = positive_reward(t.reward_mode, t.best->reward);
    auto [it, inserted] = group_max.try_emplace(group_of(t), r);
    if (!inserted) it->second = std::max(it->second, r);
  }

  NormalizedRewardTable table;
  std::map<std::pair<std::string, std::uint64_t>, std::pair<double, std::size_t>> sums;
  std::vector<std::string> agent_order;
  std::map<GroupKey, bool> warned;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    if (!t.best) continue;
    const std::string agent = agent_names.empty() ? t.agent_type : agent_names[i];
    if (std::find(agent_order.begin(), agent_order.end(), agent) == agent_order.end()) agent_order.push_back(agent);
    const auto g = group_of(t);
    const double denom = group_max.at(g);
    double normalized = 0.0;
    if (denom > 0.0) {
      normalized = std::clamp(positive_reward(t.reward_mode, t.best->reward) / denom, 0.0, 1.0);
    } else if (!warned[g]) {
      warned[g] = true;
      table.warnings.push_back("every best reward is zero for " + std::get<0>(g) + "/" + std::get<1>(g) +
                               " at budget " + std::to_string(std::get<3>(g)) + "; normalized to 0");
    }
    auto& s = sums[{agent, t.sample_budget}];
    s.first += normalized;
    ++s.second;
  }
  for (const auto& agent : agent_order) {
    for (const auto& [k, s] : sums) {
      if (k.first != agent) continue;
      table.rows.push_back({agent, k.second, s.first / static_cast<double>(s.second), s.second});
    }
  }
  return table;
}

}  // namespace dsegym
