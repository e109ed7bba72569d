#include "dsegym/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dsegym/error.hpp"

namespace dsegym {

std::string_view unit_name(Unit unit) noexcept {
  switch (unit) {
    case Unit::kSeconds: return "s";
    case Unit::kWatts: return "W";
    case Unit::kJoules: return "J";
    case Unit::kSquareMm: return "mm2";
    case Unit::kOpsPerSecond: return "ops/s";
    case Unit::kNone: return "";
  }
  return "";
}

RewardMode reward_mode_from_name(std::string_view name) {
  for (auto m : {RewardMode::kTargetProximity, RewardMode::kBudgetDistance, RewardMode::kReciprocal}) {
    if (reward_mode_name(m) == name) return m;
  }
  throw InvalidArgument("unknown reward mode '" + std::string(name) + "'");
}

Unit unit_from_name(std::string_view name) {
  if (name == "s") return Unit::kSeconds;
  if (name == "W") return Unit::kWatts;
  if (name == "J") return Unit::kJoules;
  if (name == "mm2") return Unit::kSquareMm;
  if (name == "ops/s") return Unit::kOpsPerSecond;
  if (name.empty()) return Unit::kNone;
  throw InvalidArgument("unknown unit '" + std::string(name) + "'");
}

Unit default_unit(std::string_view metric) noexcept {
  if (metric == "latency" || metric == "runtime" || metric == "performance") return Unit::kSeconds;
  if (metric == "power") return Unit::kWatts;
  if (metric == "energy") return Unit::kJoules;
  if (metric == "area") return Unit::kSquareMm;
  if (metric == "throughput") return Unit::kOpsPerSecond;
  return Unit::kNone;
}

Observation& Observation::set(std::string name, double value, Unit unit) {
  if (!std::isfinite(value)) throw InvalidArgument("metric '" + name + "' is not finite");
  if (get(name)) throw InvalidArgument("metric '" + name + "' set twice");
  metrics_.push_back(Metric{std::move(name), value, unit});
  return *this;
}

std::optional<double> Observation::get(std::string_view name) const noexcept {
  for (const auto& m : metrics_) {
    if (m.name == name) return m.value;
  }
  return std::nullopt;
}

double Observation::at(std::string_view name) const {
  if (auto v = get(name)) return *v;
  throw InvalidArgument("observation has no metric '" + std::string(name) + "'");
}

std::string_view reward_mode_name(RewardMode mode) noexcept {
  switch (mode) {
    case RewardMode::kTargetProximity: return "target_proximity";
    case RewardMode::kBudgetDistance: return "budget_distance";
    case RewardMode::kReciprocal: return "reciprocal";
  }
  return "";
}

RewardSpec RewardSpec::target_proximity(std::vector<TargetTerm> targets, double cap) {
  RewardSpec s;
  s.mode = RewardMode::kTargetProximity;
  s.targets = std::move(targets);
  s.cap = cap;
  s.validate();
  return s;
}

RewardSpec RewardSpec::budget_distance(std::vector<BudgetTerm> budgets) {
  RewardSpec s;
  s.mode = RewardMode::kBudgetDistance;
  s.budgets = std::move(budgets);
  s.validate();
  return s;
}

RewardSpec RewardSpec::reciprocal(std::string metric) {
  RewardSpec s;
  s.mode = RewardMode::kReciprocal;
  s.reciprocal_metric = std::move(metric);
  s.validate();
  return s;
}

void RewardSpec::validate() const {
  if (!(cap > 0) || !std::isfinite(cap)) throw InvalidArgument("reward cap must be positive and finite");
  switch (mode) {
    case RewardMode::kTargetProximity:
      if (targets.empty() || !budgets.empty() || !reciprocal_metric.empty()) {
        throw InvalidArgument("target_proximity needs targets and nothing else");
      }
      for (const auto& t : targets) {
        if (!(t.target > 0) || !std::isfinite(t.target)) {
          throw InvalidArgument("target for '" + t.metric + "' must be positive");
        }
      }
      break;
    case RewardMode::kBudgetDistance:
      if (budgets.empty() || !targets.empty() || !reciprocal_metric.empty()) {
        throw InvalidArgument("budget_distance needs budgets and nothing else");
      }
      for (const auto& b : budgets) {
        if (!(b.budget > 0) || !std::isfinite(b.budget)) {
          throw InvalidArgument("budget for '" + b.metric + "' must be positive");
        }
        if (!(b.weight > 0) || !std::isfinite(b.weight)) {
          throw InvalidArgument("weight for '" + b.metric + "' must be positive");
        }
      }
      break;
    case RewardMode::kReciprocal:
      if (reciprocal_metric.empty() || !targets.empty() || !budgets.empty()) {
        throw InvalidArgument("reciprocal needs exactly one metric name");
      }
      break;
  }
  std::set<std::string> names;
  for (const auto& n : metric_names()) {
    if (!names.insert(n).second) throw InvalidArgument("metric '" + n + "' named twice in reward spec");
  }
}

std::vector<std::string> RewardSpec::metric_names() const {
  std::vector<std::string> out;
  for (const auto& t : targets) out.push_back(t.metric);
  for (const auto& b : budgets) out.push_back(b.metric);
  if (!reciprocal_metric.empty()) out.push_back(reciprocal_metric);
  return out;
}

RewardSpec reward_spec_from_json(const Json& doc) {
  try {
    const auto mode = doc.at("mode").get<std::string>();
    const double cap = doc.value("cap", RewardSpec::kDefaultCap);
    if (mode == "target_proximity") {
      std::vector<TargetTerm> targets;
      for (const auto& t : doc.at("targets")) targets.push_back({t.at("metric"), t.at("target")});
      return RewardSpec::target_proximity(std::move(targets), cap);
    }
    if (mode == "budget_distance") {
      std::vector<BudgetTerm> budgets;
      for (const auto& b : doc.at("budgets")) budgets.push_back({b.at("metric"), b.at("budget"), b.value("weight", 1.0)});
      return RewardSpec::budget_distance(std::move(budgets));
    }
    if (mode == "reciprocal") return RewardSpec::reciprocal(doc.at("metric").get<std::string>());
    throw InvalidArgument("unknown reward mode '" + mode + "'");
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed reward spec: ") + e.what());
  }
}

Json reward_spec_to_json(const RewardSpec& spec) {
  Json doc;
  doc["mode"] = reward_mode_name(spec.mode);
  switch (spec.mode) {
    case RewardMode::kTargetProximity: {
      Json targets = Json::array();
      for (const auto& t : spec.targets) targets.push_back({{"metric", t.metric}, {"target", t.target}});
      doc["targets"] = std::move(targets);
      doc["cap"] = spec.cap;
      break;
    }
    case RewardMode::kBudgetDistance: {
      Json budgets = Json::array();
      for (const auto& b : spec.budgets) {
        budgets.push_back({{"metric", b.metric}, {"budget", b.budget}, {"weight", b.weight}});
      }
      doc["budgets"] = std::move(budgets);
      break;
    }
    case RewardMode::kReciprocal:
      doc["metric"] = spec.reciprocal_metric;
      break;
  }
  return doc;
}

double compute_target_reward(double target, double observed, double cap) {
  if (!(target > 0) || !std::isfinite(target)) throw InvalidArgument("target must be positive");
  if (!(cap > 0)) throw InvalidArgument("cap must be positive");
  if (!std::isfinite(observed)) throw InvalidArgument("invalid observation");
  const double gap = std::abs(target - observed);
  if (gap < target / cap) return cap;
  return std::min(cap, target / gap);
}

double compute_joint_reward(std::span<const double> per_metric_rewards) {
  if (per_metric_rewards.empty()) throw InvalidArgument("joint reward needs at least one metric");
  for (double r : per_metric_rewards) {
    if (!(r > 0) || !std::isfinite(r)) throw InvalidArgument("per-metric rewards must be positive and finite");
  }
  if (per_metric_rewards.size() == 1) return per_metric_rewards.front();
  double product = 1.0;
  for (double r : per_metric_rewards) product *= r;
  const auto n = static_cast<double>(per_metric_rewards.size());
  if (std::isfinite(product) && product > 0) {
    return per_metric_rewards.size() == 2 ? std::sqrt(product) : std::pow(product, 1.0 / n);
  }
  double log_sum = 0.0;
  for (double r : per_metric_rewards) log_sum += std::log(r);
  return std::exp(log_sum / n);
}

double compute_budget_distance(std::span<const double> observed, std::span<const double> budgets,
                               std::span<const double> weights) {
  if (observed.size() != budgets.size() || observed.size() != weights.size()) {
    throw InvalidArgument("budget distance: misaligned list lengths");
  }
  if (observed.empty()) throw InvalidArgument("budget distance: empty metric list");
  double distance = 0.0;
  for (std::size_t m = 0; m < observed.size(); ++m) {
    if (!(budgets[m] > 0)) throw InvalidArgument("budget distance: budgets must be positive");
    distance += weights[m] * (observed[m] - budgets[m]) / budgets[m];
  }
  return distance;
}

double compute_reciprocal_reward(double x) {
  if (!(x > 0) || !std::isfinite(x)) throw InvalidArgument("reciprocal reward needs a positive argument");
  return 1.0 / x;
}

ScoreResult score(const RewardSpec& spec, const Observation& obs) {
  if (!obs.valid()) return {0.0, true};
  switch (spec.mode) {
    case RewardMode::kTargetProximity: {
      std::vector<double> rewards;
      rewards.reserve(spec.targets.size());
      for (const auto& t : spec.targets) rewards.push_back(compute_target_reward(t.target, obs.at(t.metric), spec.cap));
      return {compute_joint_reward(rewards), false};
    }
    case RewardMode::kBudgetDistance: {
      std::vector<double> d, b, w;
      for (const auto& term : spec.budgets) {
        d.push_back(obs.at(term.metric));
        b.push_back(term.budget);
        w.push_back(term.weight);
      }
      // Negated so that higher is better; 0.0 rather than -0.0 at budget.
      return {0.0 - compute_budget_distance(d, b, w), false};
    }
    case RewardMode::kReciprocal:
      return {compute_reciprocal_reward(obs.at(spec.reciprocal_metric)), false};
  }
  return {0.0, true};
}

double positive_reward(RewardMode mode, double reward) noexcept {
  return mode == RewardMode::kBudgetDistance ? std::exp(reward) : reward;
}

double WorkloadSpec::trait(std::string_view name) const {
  const auto it = traits.find(std::string(name));
  if (it == traits.end()) throw InvalidArgument("workload '" + id + "' has no trait '" + std::string(name) + "'");
  return it->second;
}

double WorkloadSpec::trait_or(std::string_view name, double fallback) const noexcept {
  const auto it = traits.find(std::string(name));
  return it == traits.end() ? fallback : it->second;
}

void WorkloadSpec::validate() const {
  if (id.empty()) throw InvalidArgument("workload id must not be empty");
  for (const auto& [name, value] : traits) {
    if (!std::isfinite(value)) throw InvalidArgument("workload trait '" + name + "' is not finite");
    if (name.ends_with("fraction") && (value < 0 || value > 1)) {
      throw InvalidArgument("workload trait '" + name + "' must lie in [0, 1]");
    }
  }
}

}  // namespace dsegym
