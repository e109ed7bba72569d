#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsegym/json_io.hpp"
#include "dsegym/spaces.hpp"

namespace dsegym {

enum class Unit { kSeconds, kWatts, kJoules, kSquareMm, kOpsPerSecond, kNone };

std::string_view unit_name(Unit unit) noexcept;
Unit unit_from_name(std::string_view name);
// Conventional unit for a well-known metric name ("latency" -> seconds, ...).
Unit default_unit(std::string_view metric) noexcept;

struct Metric {
  std::string name;
  double value = 0.0;
  Unit unit = Unit::kNone;

  friend bool operator==(const Metric&, const Metric&) = default;
};

// Metric vector produced by one cost-model evaluation. Insertion order is kept
// and names are unique; values are always finite.
class Observation {
 public:
  Observation() = default;

  static Observation infeasible() {
    Observation o;
    o.valid_ = false;
    return o;
  }

  // Throws InvalidArgument on a duplicate name or a non-finite value.
  Observation& set(std::string name, double value, Unit unit);
  Observation& set(std::string name, double value) {
    auto unit = default_unit(name);
    return set(std::move(name), value, unit);
  }

  std::optional<double> get(std::string_view name) const noexcept;
  double at(std::string_view name) const;

  bool valid() const noexcept { return valid_; }
  const std::vector<Metric>& metrics() const noexcept { return metrics_; }
  bool empty() const noexcept { return metrics_.empty(); }

  friend bool operator==(const Observation&, const Observation&) = default;

 private:
  std::vector<Metric> metrics_;
  bool valid_ = true;
};

enum class RewardMode { kTargetProximity, kBudgetDistance, kReciprocal };

std::string_view reward_mode_name(RewardMode mode) noexcept;
RewardMode reward_mode_from_name(std::string_view name);

struct TargetTerm {
  std::string metric;
  double target = 1.0;
};

struct BudgetTerm {
  std::string metric;
  double budget = 1.0;
  double weight = 1.0;
};

// Objective definition mapping an Observation to a scalar reward.
// Only the fields of the active mode are populated.
struct RewardSpec {
  static constexpr double kDefaultCap = 1e9;

  RewardMode mode = RewardMode::kTargetProximity;
  std::vector<TargetTerm> targets;
  std::vector<BudgetTerm> budgets;
  std::string reciprocal_metric;
  double cap = kDefaultCap;

  static RewardSpec target_proximity(std::vector<TargetTerm> targets, double cap = kDefaultCap);
  static RewardSpec budget_distance(std::vector<BudgetTerm> budgets);
  static RewardSpec reciprocal(std::string metric);

  // Throws InvalidArgument when an invariant is broken.
  void validate() const;
  std::vector<std::string> metric_names() const;
};

RewardSpec reward_spec_from_json(const Json& doc);
Json reward_spec_to_json(const RewardSpec& spec);

// target / |target - observed|, capped at `cap` near (and at) the target.
double compute_target_reward(double target, double observed, double cap = RewardSpec::kDefaultCap);
// Geometric mean.
double compute_joint_reward(std::span<const double> per_metric_rewards);
// Σ α_m (D_m - B_m) / B_m, signed; lower is better.
double compute_budget_distance(std::span<const double> observed, std::span<const double> budgets,
                               std::span<const double> weights);
double compute_reciprocal_reward(double x);

struct ScoreResult {
  double reward = 0.0;
  bool infeasible = false;
};

// Higher is better for every mode: BudgetDistance is returned negated.
ScoreResult score(const RewardSpec& spec, const Observation& obs);

// Maps a score onto (0, inf) preserving order. BudgetDistance scores are
// exponentiated; other modes are already non-negative and pass through.
double positive_reward(RewardMode mode, double reward) noexcept;

struct WorkloadSpec {
  std::string id;
  std::map<std::string, double> traits;

  double trait(std::string_view name) const;
  double trait_or(std::string_view name, double fallback) const noexcept;
  void validate() const;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, std::string> info;
};

// Agent-facing environment. One instance belongs to one trial at a time.
// step() is deterministic in (point, workload, seed); reset() returns the
// environment to the state of a fresh instance.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Observation reset() = 0;
  virtual StepResult step(const DesignPoint& point) = 0;
  virtual const ParameterSpace& space() const = 0;
  virtual const WorkloadSpec& workload() const = 0;
  virtual const RewardSpec& reward_spec() const = 0;
  virtual std::string id() const = 0;
};

}  // namespace dsegym
