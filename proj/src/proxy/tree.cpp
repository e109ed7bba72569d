#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsegym/error.hpp"
#include "dsegym/proxy.hpp"

namespace dsegym {

void TrainingRows::add(std::span<const double> x, double y) {
  if (columns == 0 && targets.empty()) columns = x.size();
  if (x.size() != columns) throw InvalidArgument("feature row has the wrong width");
  if (!std::isfinite(y)) throw InvalidArgument("training target is not finite");
  features.insert(features.end(), x.begin(), x.end());
  targets.push_back(y);
}

TrainingRows rows_from_dataset(const Dataset& dataset, const ParameterSpace& space, const std::string& metric) {
  TrainingRows rows;
  rows.columns = space.encoded_dimension();
  std::vector<double> x(rows.columns);
  for (const auto& r : dataset.records()) {
    if (r.observation.empty()) continue;
    const auto y = r.metric(metric);
    if (!y) {
      throw InvalidArgument("record " + r.experiment_id + "#" + std::to_string(r.step_index) + " lacks metric '" +
                            metric + "'");
    }
    encode_into(space, space.from_named(r.design), x);
    rows.add(x, *y);
  }
  return rows;
}

void TreeParams::validate() const {
  if (max_depth < kUnlimitedDepth) throw InvalidArgument("max_depth must be >= 0 or unlimited");
  if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
  if (!(feature_subsample > 0.0 && feature_subsample <= 1.0)) throw InvalidArgument("feature_subsample must be in (0,1]");
}

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) throw InvalidArgument("predict on an untrained tree");
  std::size_t n = 0;
  while (nodes_[n].feature >= 0) {
    const auto& node = nodes_[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right);
  }
  return nodes_[n].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  // Children always follow their parent in the node array.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

Json RegressionTree::to_json() const {
  Json feature = Json::array(), threshold = Json::array(), left = Json::array(), right = Json::array(),
       value = Json::array(), samples = Json::array();
  for (const auto& n : nodes_) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    samples.push_back(n.samples);
  }
  Json doc;
  doc["feature"] = std::move(feature);
  doc["threshold"] = std::move(threshold);
  doc["left"] = std::move(left);
  doc["right"] = std::move(right);
  doc["value"] = std::move(value);
  doc["samples"] = std::move(samples);
  return doc;
}

RegressionTree RegressionTree::from_json(const Json& doc) {
  RegressionTree tree;
  const auto& feature = doc.at("feature");
  const std::size_t n = feature.size();
  for (const char* key : {"threshold", "left", "right", "value", "samples"}) {
    if (doc.at(key).size() != n) throw InvalidArgument(std::string("tree column '") + key + "' has the wrong length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode node;
    node.feature = feature[i].get<int>();
    node.threshold = doc.at("threshold")[i].get<double>();
    node.left = doc.at("left")[i].get<std::int32_t>();
    node.right = doc.at("right")[i].get<std::int32_t>();
    node.value = doc.at("value")[i].get<double>();
    node.samples = doc.at("samples")[i].get<std::uint32_t>();
    if (node.feature >= 0 && (node.left <= static_cast<std::int32_t>(i) || node.right <= static_cast<std::int32_t>(i) ||
                              node.left >= static_cast<std::int32_t>(n) || node.right >= static_cast<std::int32_t>(n))) {
      throw InvalidArgument("tree node " + std::to_string(i) + " has invalid children");
    }
    tree.nodes_.push_back(node);
  }
  if (tree.nodes_.empty()) throw InvalidArgument("tree has no nodes");
  return tree;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingRows& rows, const TreeParams& params, Rng& rng) : rows_(rows), params_(params), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> sample) {
    idx_ = std::move(sample);
    features_.resize(rows_.columns);
    std::iota(features_.begin(), features_.end(), 0);
    RegressionTree tree;
    struct Task {
      std::size_t node, begin, end;
      int depth;
    };
    tree.nodes_.emplace_back();
    std::vector<Task> stack{{0, 0, idx_.size(), 0}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      auto& node = tree.nodes_[t.node];
      node.samples = static_cast<std::uint32_t>(t.end - t.begin);
      const Split split = choose_split(t.begin, t.end, t.depth);
      if (split.feature < 0) {
        tree.nodes_[t.node].value = leaf_value(t.begin, t.end);
        continue;
      }
      const auto mid = std::stable_partition(idx_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                             idx_.begin() + static_cast<std::ptrdiff_t>(t.end), [&](std::size_t r) {
                                               return value(r, static_cast<std::size_t>(split.feature)) < split.threshold;
                                             });
      const auto m = static_cast<std::size_t>(mid - idx_.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes_.size());
      tree.nodes_.emplace_back();
      tree.nodes_.emplace_back();
      auto& parent = tree.nodes_[t.node];
      parent.feature = split.feature;
      parent.threshold = split.threshold;
      parent.left = left;
      parent.right = left + 1;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({static_cast<std::size_t>(left + 1), m, t.end, t.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), t.begin, m, t.depth + 1});
    }
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
  };

  double value(std::size_t row, std::size_t feature) const { return rows_.features[row * rows_.columns + feature]; }
  double target(std::size_t row) const { return rows_.targets[row]; }

  double leaf_value(std::size_t begin, std::size_t end) const {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = begin; k < end; ++k) {
      const double y = target(idx_[k]);
      sum += y;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    return std::clamp(sum / static_cast<double>(end - begin), lo, hi);
  }

  Split choose_split(std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    if (params_.max_depth != TreeParams::kUnlimitedDepth && depth >= params_.max_depth) return {};
    if (n < 2 * params_.min_samples_leaf) return {};
    const double first = target(idx_[begin]);
    bool constant = true;
    for (std::size_t k = begin + 1; k < end && constant; ++k) constant = target(idx_[k]) == first;
    if (constant) return {};

    // Shuffle so the first `k` features are this node's random subset.
    const std::size_t d = features_.size();
    const auto k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(params_.feature_subsample * static_cast<double>(d))), 1, d);
    for (std::size_t i = 0; i < k; ++i) std::swap(features_[i], features_[i + rng_.below(d - i)]);

    Split best;
    for (std::size_t i = 0; i < k; ++i) scan_feature(features_[i], begin, end, best);
    // None of the sampled features separates these rows; try the rest.
    for (std::size_t i = k; i < d && best.feature < 0; ++i) scan_feature(features_[i], begin, end, best);
    return best;
  }

  void scan_feature(std::size_t f, std::size_t begin, std::size_t end, Split& best) {
    const std::size_t n = end - begin;
    column_.resize(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto r = idx_[begin + k];
      column_[k] = {value(r, f), target(r)};
      total += target(r);
    }
    std::sort(column_.begin(), column_.end());
    double left_sum = 0.0;
    const std::size_t min_leaf = params_.min_samples_leaf;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_sum += column_[k].second;
      const std::size_t nl = k + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf) continue;
      if (nr < min_leaf) break;
      const double a = column_[k].first;
      const double b = column_[k + 1].first;
      if (!(a < b)) continue;
      const double right_sum = total - left_sum;
      // Maximizing this is equivalent to minimizing the children's squared error.
      const double score =
          left_sum * left_sum / static_cast<double>(nl) + right_sum * right_sum / static_cast<double>(nr);
      if (score > best.score) {
        double thr = a + (b - a) / 2.0;
        if (!(a < thr)) thr = b;
        best = {static_cast<int>(f), thr, score};
      }
    }
  }

  const TrainingRows& rows_;
  TreeParams params_;
  Rng& rng_;
  std::vector<std::size_t> idx_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, double>> column_;
};

RegressionTree train_tree(const TrainingRows& rows, std::span<const std::size_t> sample, const TreeParams& params,
                          Rng& rng) {
  params.validate();
  if (sample.empty()) throw InvalidArgument("cannot train a tree on no rows");
  if (rows.columns == 0) throw InvalidArgument("training rows have no features");
  if (sample.size() < params.min_samples_leaf) throw InvalidArgument("fewer rows than min_samples_leaf");
  for (auto r : sample) {
    if (r >= rows.size()) throw InvalidArgument("sample index out of range");
  }
  TreeBuilder builder(rows, params, rng);
  return builder.build(std::vector<std::size_t>(sample.begin(), sample.end()));
}

RegressionTree train_tree(const TrainingRows& rows, const TreeParams& params, Rng& rng) {
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  return train_tree(rows, all, params, rng);
}

}  // namespace dsegym
