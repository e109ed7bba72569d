#include "dsegym/error.hpp"
#include "dsegym/orchestrator.hpp"

namespace dsegym {

namespace {

constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 26;

// Infeasible designs score -inf so they never win.
double reward_at(const CostModel& model, const WorkloadSpec& workload, const RewardSpec& spec, std::uint64_t rank) {
  const auto obs = model.evaluate(model.space().unrank(rank), workload);
  const auto s = score(spec, obs);
  return s.infeasible ? -std::numeric_limits<double>::infinity() : s.reward;
}

}  // namespace

std::vector<double> enumerate_rewards(const CostModel& model, const WorkloadSpec& workload, const RewardSpec& spec,
                                      Execution exec) {
  spec.validate();
  const auto card = cardinality_u64(model.space());
  if (!card || *card > kEnumerationLimit) throw InvalidArgument("space is too large to enumerate");
  const auto n = static_cast<std::ptrdiff_t>(*card);
  std::vector<double> rewards(*card);
  if (exec == Execution::kSerial) {
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      rewards[static_cast<std::size_t>(r)] = reward_at(model, workload, spec, static_cast<std::uint64_t>(r));
    }
  } else {
    // Cost models are pure and every point of the space is valid, so nothing throws in here.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      rewards[static_cast<std::size_t>(r)] = reward_at(model, workload, spec, static_cast<std::uint64_t>(r));
    }
  }
  return rewards;
}

OracleResult brute_force_optimum(const CostModel& model, const WorkloadSpec& workload, const RewardSpec& spec,
                                 Execution exec) {
  const auto rewards = enumerate_rewards(model, workload, spec, exec);
  OracleResult result;
  result.points = rewards.size();
  result.best_reward = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rewards.size(); ++r) {
    if (rewards[r] == -std::numeric_limits<double>::infinity()) {
      ++result.infeasible;
      continue;
    }
    if (rewards[r] > result.best_reward) {
      result.best_reward = rewards[r];
      result.best_rank = r;
    }
  }
  if (result.infeasible == result.points) throw InvalidArgument("every design in the space is infeasible");
  result.best_point = model.space().unrank(result.best_rank);
  return result;
}

OracleResult brute_force_optimum(const std::string& env_id, const std::string& workload_id,
                                 const std::string& objective, Execution exec) {
  const auto fixture = EnvFixture::load(env_id);
  const auto model = make_cost_model(fixture);
  const auto wid = workload_id.empty() ? fixture.workload_ids().front() : workload_id;
  return brute_force_optimum(*model, fixture.workload(wid), fixture.objective(wid, objective), exec);
}

}  // namespace dsegym
