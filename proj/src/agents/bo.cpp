#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "dsegym/bo.hpp"
#include "dsegym/error.hpp"

namespace dsegym {

namespace {

constexpr int kJitterRetries = 3;

}  // namespace

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return params_.signal_variance * std::exp(-sq / (2.0 * params_.length_scale * params_.length_scale));
}

GaussianProcess GaussianProcess::fit(const std::vector<std::vector<double>>& inputs,
                                     const std::vector<double>& targets, const GpParams& params) {
  if (inputs.empty() || inputs.size() != targets.size()) throw InvalidArgument("GP fit needs matching, non-empty data");
  if (!(params.length_scale > 0.0) || !(params.signal_variance > 0.0) || !(params.noise >= 0.0)) {
    throw InvalidArgument("GP length_scale and signal_variance must be > 0, noise >= 0");
  }
  const auto n = static_cast<Eigen::Index>(inputs.size());
  const auto d = static_cast<Eigen::Index>(inputs.front().size());

  GaussianProcess gp;
  gp.params_ = params;
  gp.inputs_.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(inputs[i].size()) != d) throw InvalidArgument("GP inputs differ in dimension");
    for (Eigen::Index j = 0; j < d; ++j) gp.inputs_(i, j) = inputs[i][j];
  }

  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double t : targets) var += (t - mean) * (t - mean);
  var /= static_cast<double>(n);
  gp.target_mean_ = mean;
  gp.target_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = gp.standardize(targets[i]);
  gp.best_target_ = y.maxCoeff();

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double sq = (gp.inputs_.row(i) - gp.inputs_.row(j)).squaredNorm();
      const double v = params.signal_variance * std::exp(-sq / (2.0 * params.length_scale * params.length_scale));
      k(i, j) = v;
      k(j, i) = v;
    }
  }

  double jitter = params.noise;
  for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    const bool ok = llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0;
    if (ok) {
      gp.chol_lower_ = llt.matrixL();
      gp.alpha_ = llt.solve(y);
      gp.jitter_ = jitter;
      if (gp.alpha_.allFinite()) return gp;
    }
    jitter = jitter > 0.0 ? jitter * 10.0 : 1e-10;
  }
  throw Error("GP kernel matrix is singular even after raising the jitter");
}

GaussianProcess::Prediction GaussianProcess::predict(std::span<const double> x) const {
  const auto n = inputs_.rows();
  if (static_cast<Eigen::Index>(x.size()) != inputs_.cols()) throw InvalidArgument("GP query has wrong dimension");
  const Eigen::Map<const Eigen::RowVectorXd> q(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd kx(n);
  const double inv = 1.0 / (2.0 * params_.length_scale * params_.length_scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    kx(i) = params_.signal_variance * std::exp(-(inputs_.row(i) - q).squaredNorm() * inv);
  }
  Prediction p;
  p.mean = kx.dot(alpha_);
  const Eigen::VectorXd v = chol_lower_.triangularView<Eigen::Lower>().solve(kx);
  p.variance = std::max(0.0, params_.signal_variance - v.squaredNorm());
  return p;
}

double expected_improvement(double mean, double sigma, double incumbent, double xi) noexcept {
  const double gain = mean - incumbent - xi;
  if (!(sigma > 1e-12)) return std::max(0.0, gain);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return gain * cdf + sigma * pdf;
}

void BoState::validate() const {
  if (!(gp.length_scale > 0.0)) throw InvalidArgument("BO length_scale must be > 0");
  if (!(gp.signal_variance > 0.0)) throw InvalidArgument("BO signal_variance must be > 0");
  if (!(gp.noise > 0.0)) throw InvalidArgument("BO noise must be > 0");
  if (exploration_offset < 0.0) throw InvalidArgument("BO exploration_offset must be >= 0");
  if (candidate_pool < 1) throw InvalidArgument("BO candidate_pool must be >= 1");
  if (initial_samples < 1) throw InvalidArgument("BO initial_samples must be >= 1");
}

BoState bo_fit(BoState state, const std::vector<std::pair<std::vector<double>, double>>& observations) {
  if (observations.empty()) throw InvalidArgument("bo_fit needs at least one observation");
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  x.reserve(observations.size());
  y.reserve(observations.size());
  for (const auto& [features, reward] : observations) {
    x.push_back(features);
    y.push_back(reward);
  }
  state.posterior = GaussianProcess::fit(x, y, state.gp);
  return state;
}

DesignPoint bo_propose(const BoState& state, const ParameterSpace& space, Rng& rng,
                       const std::function<bool(const DesignPoint&)>& skip) {
  if (!state.posterior || state.observed < static_cast<std::size_t>(state.initial_samples)) {
    return sample_uniform(space, rng);
  }
  const auto& gp = *state.posterior;
  std::vector<double> features(space.encoded_dimension());
  std::optional<DesignPoint> best;
  std::optional<DesignPoint> first;
  double best_ei = -1.0;
  for (int c = 0; c < state.candidate_pool; ++c) {
    DesignPoint candidate = sample_uniform(space, rng);
    if (!first) first = candidate;
    if (skip && skip(candidate)) continue;
    encode_into(space, candidate, features);
    const auto pred = gp.predict(features);
    const double ei =
        expected_improvement(pred.mean, std::sqrt(pred.variance), gp.best_standardized_target(), state.exploration_offset);
    if (ei > best_ei) {
      best_ei = ei;
      best = std::move(candidate);
    }
  }
  return best ? *best : *first;
}

BoAgent::BoAgent(AgentContext context, HyperparamSet hyperparams) : Agent(std::move(context), std::move(hyperparams)) {
  const auto& hp = this->hyperparams();
  state_.gp.length_scale = hp.get("length_scale");
  state_.gp.signal_variance = hp.get("signal_variance");
  state_.gp.noise = hp.get("noise");
  state_.exploration_offset = hp.get("xi");
  state_.candidate_pool = static_cast<int>(hp.get("candidate_pool"));
  state_.initial_samples = static_cast<int>(hp.get("initial_samples"));
  const double history = hp.get("max_history");
  if (history < 2) throw InvalidArgument("BO max_history must be >= 2");
  max_history_ = static_cast<std::size_t>(history);
  state_.validate();
}

std::vector<std::size_t> BoAgent::training_window() const {
  std::vector<std::size_t> all(history_.size());
  std::iota(all.begin(), all.end(), 0);
  if (history_.size() <= max_history_) return all;

  std::vector<std::size_t> by_reward = all;
  std::stable_sort(by_reward.begin(), by_reward.end(),
                   [&](std::size_t a, std::size_t b) { return history_[a].second > history_[b].second; });
  std::vector<bool> taken(history_.size(), false);
  std::vector<std::size_t> window;
  for (std::size_t k = 0; k < max_history_ / 2; ++k) {
    window.push_back(by_reward[k]);
    taken[by_reward[k]] = true;
  }
  for (auto i = history_.size(); i-- > 0 && window.size() < max_history_;) {
    if (!taken[i]) window.push_back(i);
  }
  std::sort(window.begin(), window.end());
  return window;
}

DesignPoint BoAgent::propose(Rng& rng) {
  if (state_.observed >= static_cast<std::size_t>(state_.initial_samples) && !history_.empty()) {
    std::vector<std::pair<std::vector<double>, double>> train;
    for (auto i : training_window()) train.push_back(history_[i]);
    state_ = bo_fit(std::move(state_), train);
  }
  return bo_propose(state_, space(), rng, [this](const DesignPoint& p) { return seen_.count(p) > 0; });
}

void BoAgent::on_observe(const DesignPoint& point, double reward) {
  ++state_.observed;
  // Evaluations are deterministic, so a repeated point adds nothing to the GP.
  if (seen_.insert(point).second) history_.emplace_back(encode(space(), point), reward);
}

}  // namespace dsegym
