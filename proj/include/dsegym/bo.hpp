#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dsegym/agent.hpp"

namespace dsegym {

struct GpParams {
  double length_scale = 0.3;
  double signal_variance = 1.0;
  double noise = 1e-6;  // jitter added to the kernel diagonal
};

// Exact GP regression with an RBF kernel. Targets are standardized to zero
// mean and unit variance; predictions are on that standardized scale.
class GaussianProcess {
 public:
  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
  };

  // Jitter is raised x10 up to three times if the kernel matrix is not
  // numerically positive-definite; after that fit throws.
  static GaussianProcess fit(const std::vector<std::vector<double>>& inputs, const std::vector<double>& targets,
                             const GpParams& params);

  Prediction predict(std::span<const double> x) const;
  double kernel(std::span<const double> a, std::span<const double> b) const;

  double standardize(double y) const noexcept { return (y - target_mean_) / target_scale_; }
  double best_standardized_target() const noexcept { return best_target_; }
  double jitter() const noexcept { return jitter_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_.rows()); }

 private:
  GpParams params_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd chol_lower_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  double best_target_ = 0.0;
  double jitter_ = 0.0;
};

// EI for maximization; sigma <= 0 degenerates to max(0, mean - incumbent - xi).
double expected_improvement(double mean, double sigma, double incumbent, double xi) noexcept;

struct BoState {
  GpParams gp;
  double exploration_offset = 0.01;  // xi
  int candidate_pool = 256;
  int initial_samples = 10;
  std::optional<GaussianProcess> posterior;
  std::size_t observed = 0;

  void validate() const;
};

// Fits the posterior on (encoded vector, reward) pairs.
BoState bo_fit(BoState state, const std::vector<std::pair<std::vector<double>, double>>& observations);

// Warm-up (observed < initial_samples or no posterior) samples uniformly.
// Otherwise returns the EI argmax over a uniform candidate pool, skipping
// candidates for which `skip` is true; ties go to the earliest candidate.
DesignPoint bo_propose(const BoState& state, const ParameterSpace& space, Rng& rng,
                       const std::function<bool(const DesignPoint&)>& skip = {});

class BoAgent final : public Agent {
 public:
  BoAgent(AgentContext context, HyperparamSet hyperparams);

  std::string type() const override { return "bo"; }
  DesignPoint propose(Rng& rng) override;
  const BoState& state() const noexcept { return state_; }

 private:
  void on_observe(const DesignPoint& point, double reward) override;
  // The GP sees at most max_history points: the best half and the most recent.
  std::vector<std::size_t> training_window() const;

  BoState state_;
  std::size_t max_history_ = 96;
  std::vector<std::pair<std::vector<double>, double>> history_;
  std::unordered_set<DesignPoint, DesignPointHash> seen_;
};

}  // namespace dsegym
