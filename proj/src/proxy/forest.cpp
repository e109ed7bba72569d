#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsegym/error.hpp"
#include "dsegym/proxy.hpp"

namespace dsegym {

namespace {

constexpr const char* kModelFormat = "dsegym-forest";
constexpr int kModelVersion = 1;

RegressionTree train_member(const TrainingRows& rows, const ForestParams& params, const Rng& master, int t) {
  Rng rng = master.split(static_cast<std::uint64_t>(t));
  const std::size_t n = rows.size();
  std::vector<std::size_t> sample(n);
  if (params.bootstrap) {
    for (auto& s : sample) s = rng.below(n);
  } else {
    std::iota(sample.begin(), sample.end(), 0);
  }
  return train_tree(rows, sample, params.tree, rng);
}

}  // namespace

void ForestParams::validate() const {
  if (n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
  tree.validate();
}

Json ForestParams::to_json() const {
  Json doc;
  doc["n_trees"] = n_trees;
  doc["max_depth"] = tree.max_depth;
  doc["min_samples_leaf"] = tree.min_samples_leaf;
  doc["feature_subsample"] = tree.feature_subsample;
  doc["bootstrap"] = bootstrap;
  return doc;
}

ForestParams ForestParams::from_json(const Json& doc) {
  ForestParams p;
  p.n_trees = doc.value("n_trees", p.n_trees);
  p.tree.max_depth = doc.value("max_depth", p.tree.max_depth);
  p.tree.min_samples_leaf = doc.value("min_samples_leaf", p.tree.min_samples_leaf);
  p.tree.feature_subsample = doc.value("feature_subsample", p.tree.feature_subsample);
  p.bootstrap = doc.value("bootstrap", p.bootstrap);
  p.validate();
  return p;
}

RandomForest train_forest(const TrainingRows& rows, const ParameterSpace& space, const std::string& metric,
                          const ForestParams& params, Rng& rng, Execution exec) {
  params.validate();
  if (rows.size() == 0) throw InvalidArgument("cannot train a forest on no rows");
  if (rows.columns != space.encoded_dimension()) throw InvalidArgument("feature width does not match the space");

  RandomForest forest;
  forest.target_metric_ = metric;
  forest.space_ = space;
  forest.params_ = params;
  forest.n_train_ = rows.size();
  const auto [lo, hi] = std::minmax_element(rows.targets.begin(), rows.targets.end());
  forest.target_min_ = *lo;
  forest.target_max_ = *hi;

  const Rng master = rng;
  rng();
  forest.trees_.resize(static_cast<std::size_t>(params.n_trees));
  if (exec == Execution::kSerial) {
    for (int t = 0; t < params.n_trees; ++t) forest.trees_[static_cast<std::size_t>(t)] = train_member(rows, params, master, t);
  } else {
    // Exceptions must not escape an OpenMP region; the inputs were validated above.
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < params.n_trees; ++t) forest.trees_[static_cast<std::size_t>(t)] = train_member(rows, params, master, t);
  }
  return forest;
}

RandomForest train_forest(const Dataset& dataset, const ParameterSpace& space, const std::string& metric,
                          const ForestParams& params, Rng& rng, Execution exec) {
  return train_forest(rows_from_dataset(dataset, space, metric), space, metric, params, rng, exec);
}

double RandomForest::predict(std::span<const double> x) const {
  if (trees_.empty()) throw InvalidArgument("predict on an untrained forest");
  if (x.size() != space_.encoded_dimension()) throw InvalidArgument("query has the wrong feature width");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return std::clamp(sum / static_cast<double>(trees_.size()), target_min_, target_max_);
}

double RandomForest::predict(const DesignPoint& point) const { return predict(encode(space_, point)); }

std::vector<double> RandomForest::predict_batch(const TrainingRows& rows, Execution exec) const {
  if (rows.columns != space_.encoded_dimension()) throw InvalidArgument("feature width does not match the model");
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  std::vector<double> out(rows.size());
  if (exec == Execution::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = predict(rows.row(static_cast<std::size_t>(i)));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = predict(rows.row(static_cast<std::size_t>(i)));
  }
  return out;
}

Json RandomForest::to_json() const {
  Json trees = Json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  Json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  doc["target_metric"] = target_metric_;
  doc["space"] = space_to_json(space_);
  doc["params"] = params_.to_json();
  doc["n_train"] = n_train_;
  doc["target_min"] = target_min_;
  doc["target_max"] = target_max_;
  doc["trees"] = std::move(trees);
  return doc;
}

RandomForest RandomForest::from_json(const Json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kModelFormat || doc.at("version").get<int>() != kModelVersion) {
      throw InvalidArgument("not a version-1 forest model");
    }
    RandomForest f;
    f.target_metric_ = doc.at("target_metric").get<std::string>();
    f.space_ = space_from_json(doc.at("space"));
    f.params_ = ForestParams::from_json(doc.at("params"));
    f.n_train_ = doc.at("n_train").get<std::size_t>();
    f.target_min_ = doc.at("target_min").get<double>();
    f.target_max_ = doc.at("target_max").get<double>();
    for (const auto& t : doc.at("trees")) f.trees_.push_back(RegressionTree::from_json(t));
    if (f.trees_.empty()) throw InvalidArgument("forest model has no trees");
    const auto width = static_cast<int>(f.space_.encoded_dimension());
    for (const auto& t : f.trees_) {
      for (const auto& n : t.nodes()) {
        if (n.feature >= width) throw InvalidArgument("tree splits on a feature outside the space");
      }
    }
    return f;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed forest model: ") + e.what());
  }
}

void RandomForest::save(const std::filesystem::path& path) const { write_json_file(path, to_json(), -1); }

RandomForest RandomForest::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw InvalidArgument("rmse inputs differ in length");
  if (actual.empty()) throw InvalidArgument("rmse of an empty set");
  double sq = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(actual.size()));
}

double normalized_rmse_percent(double rmse_value, std::span<const double> actual) {
  if (actual.empty()) throw InvalidArgument("normalized rmse of an empty set");
  const auto [lo, hi] = std::minmax_element(actual.begin(), actual.end());
  const double range = *hi - *lo;
  if (range > 0.0) return rmse_value / range * 100.0;
  return rmse_value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

ProxyEvalReport evaluate_rmse(const RandomForest& model, const Dataset& test) {
  const auto rows = rows_from_dataset(test, model.space(), model.target_metric());
  if (rows.size() == 0) throw InvalidArgument("test set has no feasible records");
  const auto predicted = model.predict_batch(rows);
  ProxyEvalReport report;
  report.rmse = rmse(predicted, rows.targets);
  report.normalized_rmse_percent = normalized_rmse_percent(report.rmse, rows.targets);
  report.n_train = model.n_train();
  report.n_test = rows.size();
  report.test_agents = test.agent_counts();
  return report;
}

ProxySearchResult proxy_hyperparam_search(const Dataset& train, const Dataset& validation,
                                          const ParameterSpace& space, const std::string& metric, int budget,
                                          Rng& rng, const ProxySearchGrid& grid) {
  if (budget < 1) throw InvalidArgument("search budget must be >= 1");
  if (grid.n_trees.empty() || grid.max_depth.empty() || grid.min_samples_leaf.empty() ||
      grid.feature_subsample.empty()) {
    throw InvalidArgument("search grid has an empty axis");
  }
  const auto train_rows = rows_from_dataset(train, space, metric);
  const auto val_rows = rows_from_dataset(validation, space, metric);
  if (val_rows.size() == 0) throw InvalidArgument("validation set has no feasible records");

  std::optional<ProxySearchResult> best;
  std::vector<std::pair<ForestParams, double>> evaluated;
  for (int b = 0; b < budget; ++b) {
    ForestParams p;
    p.n_trees = grid.n_trees[rng.below(grid.n_trees.size())];
    p.tree.max_depth = grid.max_depth[rng.below(grid.max_depth.size())];
    p.tree.min_samples_leaf = grid.min_samples_leaf[rng.below(grid.min_samples_leaf.size())];
    p.tree.feature_subsample = grid.feature_subsample[rng.below(grid.feature_subsample.size())];
    Rng trial = rng.split(static_cast<std::uint64_t>(b));
    auto model = train_forest(train_rows, space, metric, p, trial);
    const double score = rmse(model.predict_batch(val_rows), val_rows.targets);
    evaluated.emplace_back(p, score);
    if (!best || score < best->validation_rmse) best = ProxySearchResult{p, std::move(model), score, {}};
  }
  best->evaluated = std::move(evaluated);
  return std::move(*best);
}

ProxyCostModel::ProxyCostModel(std::string id, std::vector<RandomForest> forests)
    : id_(std::move(id)), forests_(std::move(forests)) {
  if (forests_.empty()) throw InvalidArgument("proxy cost model needs at least one forest");
  for (const auto& f : forests_) {
    if (!(f.space() == forests_.front().space())) throw InvalidArgument("proxy forests disagree on the space");
  }
}

std::vector<std::string> ProxyCostModel::metric_names() const {
  std::vector<std::string> names;
  for (const auto& f : forests_) names.push_back(f.target_metric());
  return names;
}

Observation ProxyCostModel::evaluate(const DesignPoint& point, const WorkloadSpec&) const {
  const auto x = encode(space(), point);
  Observation obs;
  for (const auto& f : forests_) obs.set(f.target_metric(), f.predict(x));
  return obs;
}

double time_queries(const std::function<void(const DesignPoint&)>& query, const std::vector<DesignPoint>& points,
                    int repeats) {
  if (points.empty()) throw InvalidArgument("timing needs at least one query");
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& p : points) query(p);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    best = std::min(best, took.count());
  }
  return best;
}

SpeedReport measure_speedup(const std::function<void(const DesignPoint&)>& baseline,
                            const std::function<void(const DesignPoint&)>& candidate,
                            const std::vector<DesignPoint>& points, int baseline_repeats, int candidate_repeats) {
  SpeedReport r;
  r.queries = points.size();
  r.baseline_seconds = time_queries(baseline, points, baseline_repeats);
  r.candidate_seconds = time_queries(candidate, points, candidate_repeats);
  // Clock resolution floor so a near-instant candidate still gives a finite ratio.
  r.speedup = r.baseline_seconds / std::max(r.candidate_seconds, 1e-9);
  return r;
}

SpeedReport speed_benchmark(const RandomForest& model, Environment& env, const std::vector<DesignPoint>& points) {
  volatile double sink = 0.0;
  return measure_speedup([&](const DesignPoint& p) { sink = sink + env.step(p).reward; },
                         [&](const DesignPoint& p) { sink = sink + model.predict(p); }, points);
}

}  // namespace dsegym
