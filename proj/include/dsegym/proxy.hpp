#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dsegym/dataset.hpp"
#include "dsegym/envs.hpp"
#include "dsegym/parallel.hpp"
#include "dsegym/rng.hpp"
#include "dsegym/spaces.hpp"

namespace dsegym {

// Row-major feature matrix with one target per row.
struct TrainingRows {
  std::size_t columns = 0;
  std::vector<double> features;
  std::vector<double> targets;

  std::size_t size() const noexcept { return targets.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * columns, columns}; }
  void add(std::span<const double> x, double y);
};

// Encoded designs and one metric from every feasible record. Records with an
// empty observation are skipped; a feasible record without `metric` throws.
TrainingRows rows_from_dataset(const Dataset& dataset, const ParameterSpace& space, const std::string& metric);

struct TreeParams {
  static constexpr int kUnlimitedDepth = -1;
  int max_depth = kUnlimitedDepth;
  std::size_t min_samples_leaf = 1;
  double feature_subsample = 1.0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
  std::uint32_t samples = 0;
};

class RegressionTree {
 public:
  double predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const;
  int depth() const;

  Json to_json() const;
  static RegressionTree from_json(const Json& doc);

 private:
  friend class TreeBuilder;
  std::vector<TreeNode> nodes_;
};

// CART on the rows named by `sample` (repeats allowed, as in a bootstrap).
// Splits maximize the squared-error reduction over a random feature subset
// per node; thresholds are midpoints between adjacent distinct values and a
// row goes left when its value is below the threshold.
RegressionTree train_tree(const TrainingRows& rows, std::span<const std::size_t> sample, const TreeParams& params,
                          Rng& rng);
RegressionTree train_tree(const TrainingRows& rows, const TreeParams& params, Rng& rng);

struct ForestParams {
  int n_trees = 32;
  TreeParams tree;
  bool bootstrap = true;

  void validate() const;
  Json to_json() const;
  static ForestParams from_json(const Json& doc);
};

class RandomForest {
 public:
  // Mean of the tree predictions, clamped to the training target range.
  double predict(std::span<const double> x) const;
  double predict(const DesignPoint& point) const;
  std::vector<double> predict_batch(const TrainingRows& rows, Execution exec = Execution::kParallel) const;

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  const std::string& target_metric() const noexcept { return target_metric_; }
  const ParameterSpace& space() const noexcept { return space_; }
  const ForestParams& params() const noexcept { return params_; }
  std::size_t n_train() const noexcept { return n_train_; }
  double target_min() const noexcept { return target_min_; }
  double target_max() const noexcept { return target_max_; }

  Json to_json() const;
  static RandomForest from_json(const Json& doc);
  void save(const std::filesystem::path& path) const;
  static RandomForest load(const std::filesystem::path& path);

 private:
  friend RandomForest train_forest(const TrainingRows&, const ParameterSpace&, const std::string&,
                                   const ForestParams&, Rng&, Execution);
  std::vector<RegressionTree> trees_;
  std::string target_metric_;
  ParameterSpace space_;
  ForestParams params_;
  std::size_t n_train_ = 0;
  double target_min_ = 0.0;
  double target_max_ = 0.0;
};

// Tree t uses rng.split(t) for its bootstrap and splits, so serial and
// parallel training build identical forests.
RandomForest train_forest(const TrainingRows& rows, const ParameterSpace& space, const std::string& metric,
                          const ForestParams& params, Rng& rng, Execution exec = Execution::kParallel);
RandomForest train_forest(const Dataset& dataset, const ParameterSpace& space, const std::string& metric,
                          const ForestParams& params, Rng& rng, Execution exec = Execution::kParallel);

struct ProxyEvalReport {
  double rmse = 0.0;
  // rmse / (max - min of the test actuals) * 100; 0 when both are 0, inf
  // when the range is 0 but the rmse is not.
  double normalized_rmse_percent = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::map<std::string, std::size_t> test_agents;
};

double rmse(std::span<const double> predicted, std::span<const double> actual);
double normalized_rmse_percent(double rmse_value, std::span<const double> actual);
ProxyEvalReport evaluate_rmse(const RandomForest& model, const Dataset& test);

// Grid the random search draws from (with replacement).
struct ProxySearchGrid {
  std::vector<int> n_trees = {10, 50, 100};
  std::vector<int> max_depth = {4, 8, 16, TreeParams::kUnlimitedDepth};
  std::vector<std::size_t> min_samples_leaf = {1, 5, 20};
  std::vector<double> feature_subsample = {0.5, 0.8, 1.0};
};

struct ProxySearchResult {
  ForestParams params;
  RandomForest model;
  double validation_rmse = 0.0;
  std::vector<std::pair<ForestParams, double>> evaluated;
};

// Lowest validation RMSE wins; ties keep the first config found.
ProxySearchResult proxy_hyperparam_search(const Dataset& train, const Dataset& validation,
                                          const ParameterSpace& space, const std::string& metric, int budget,
                                          Rng& rng, const ProxySearchGrid& grid = {});

// A CostModel whose metrics are forest predictions, one forest per metric.
class ProxyCostModel final : public CostModel {
 public:
  ProxyCostModel(std::string id, std::vector<RandomForest> forests);

  const std::string& id() const override { return id_; }
  const ParameterSpace& space() const override { return forests_.front().space(); }
  std::vector<std::string> metric_names() const override;
  Observation evaluate(const DesignPoint& point, const WorkloadSpec& workload) const override;

 private:
  std::string id_;
  std::vector<RandomForest> forests_;
};

struct SpeedReport {
  std::size_t queries = 0;
  double baseline_seconds = 0.0;
  double candidate_seconds = 0.0;
  double speedup = 0.0;
};

// Wall time of `query` over every point; the fastest of `repeats` passes.
double time_queries(const std::function<void(const DesignPoint&)>& query, const std::vector<DesignPoint>& points,
                    int repeats);
// baseline_seconds / candidate_seconds on the same points.
SpeedReport measure_speedup(const std::function<void(const DesignPoint&)>& baseline,
                            const std::function<void(const DesignPoint&)>& candidate,
                            const std::vector<DesignPoint>& points, int baseline_repeats = 1,
                            int candidate_repeats = 5);
// Environment steps (with whatever per-step delay it has) against model predictions.
SpeedReport speed_benchmark(const RandomForest& model, Environment& env, const std::vector<DesignPoint>& points);

}  // namespace dsegym
