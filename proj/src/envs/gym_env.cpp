#include <algorithm>
#include <thread>

#include "dsegym/envs.hpp"

namespace dsegym {

GymEnv::GymEnv(std::shared_ptr<const CostModel> model, WorkloadSpec workload, RewardSpec reward, EnvOptions options)
    : model_(std::move(model)), workload_(std::move(workload)), reward_(std::move(reward)), options_(options) {
  if (!model_) throw InvalidArgument("environment needs a cost model");
  if (options_.episode_length < 1) throw InvalidArgument("episode_length must be >= 1");
  if (options_.step_delay.count() < 0) throw InvalidArgument("step delay must be non-negative");
  workload_.validate();
  reward_.validate();
  const auto metrics = model_->metric_names();
  for (const auto& m : reward_.metric_names()) {
    if (std::find(metrics.begin(), metrics.end(), m) == metrics.end()) {
      throw InvalidArgument("objective uses metric '" + m + "' which " + model_->id() + " does not produce");
    }
  }
}

Observation GymEnv::reset() {
  steps_in_episode_ = 0;
  return Observation{};
}

StepResult GymEnv::step(const DesignPoint& point) {
  model_->space().validate(point);
  if (options_.step_delay.count() > 0) std::this_thread::sleep_for(options_.step_delay);
  // A finished episode rolls over on the next step, as in a bandit loop.
  if (steps_in_episode_ >= options_.episode_length) steps_in_episode_ = 0;

  StepResult out;
  out.observation = model_->evaluate(point, workload_);
  const auto scored = score(reward_, out.observation);
  out.reward = scored.reward;
  out.info["infeasible"] = scored.infeasible ? "true" : "false";
  out.done = ++steps_in_episode_ >= options_.episode_length;
  return out;
}

std::unique_ptr<GymEnv> make_environment(const EnvRequest& request) {
  const auto fixture = EnvFixture::load(request.env_id);
  const auto ids = fixture.workload_ids();
  if (ids.empty()) throw InvalidArgument("environment '" + request.env_id + "' has no workloads");
  const std::string wid = request.workload_id.empty() ? ids.front() : request.workload_id;
  std::shared_ptr<const CostModel> model = make_cost_model(fixture);
  return std::make_unique<GymEnv>(std::move(model), fixture.workload(wid), fixture.objective(wid, request.objective),
                                  request.options);
}

}  // namespace dsegym
