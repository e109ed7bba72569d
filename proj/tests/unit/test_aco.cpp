#include <gtest/gtest.h>

#include "support.hpp"

using namespace dsegym;
using dsegym::testing::random_small_space;

namespace {

ParameterSpace aco_space() {
  return ParameterSpace({ParameterSpec::categorical("A", {"a", "b", "c", "d"}), ParameterSpec::numeric("B", 0, 2, 1)});
}

std::vector<int> draw_counts(const AcoState& state, std::size_t parameter, int n, Rng& rng) {
  std::vector<int> counts(state.pheromone[parameter].size(), 0);
  for (int i = 0; i < n; ++i) ++counts[aco_propose(state, rng).index[parameter]];
  return counts;
}

// Pearson statistic against a uniform distribution.
double chi_square_uniform(const std::vector<int>& counts) {
  double total = 0.0;
  for (int c : counts) total += c;
  const double expected = total / static_cast<double>(counts.size());
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  return chi2;
}

}  // namespace

TEST(AcoPropose, EqualPheromonesAreUniform) {
  auto state = AcoState::initial(aco_space());
  state.exploration = 0.0;
  Rng rng(1);
  for (double beta : {0.0, 1.0, 3.0}) {
    state.greediness = beta;
    // 99.9th percentile of chi-square with 3 degrees of freedom.
    EXPECT_LT(chi_square_uniform(draw_counts(state, 0, 10000, rng)), 16.27);
  }
}

TEST(AcoPropose, ZeroGreedinessIgnoresPheromones) {
  auto state = AcoState::initial(aco_space());
  state.exploration = 0.0;
  state.greediness = 0.0;
  state.pheromone[0] = {50.0, 1.0, 0.01, 7.0};
  Rng rng(2);
  EXPECT_LT(chi_square_uniform(draw_counts(state, 0, 10000, rng)), 16.27);
}

TEST(AcoPropose, DominantPheromoneWins) {
  const ParameterSpace two({ParameterSpec::categorical("A", {"a", "b"})});
  auto state = AcoState::initial(two);
  state.exploration = 0.0;
  state.greediness = 1.0;
  state.pheromone[0] = {100.0, 1.0};
  Rng rng(3);
  const auto counts = draw_counts(state, 0, 10000, rng);
  EXPECT_GE(counts[0], 9500);
  EXPECT_NEAR(counts[0] / 10000.0, 100.0 / 101.0, 0.005);
}

TEST(AcoPropose, FullExplorationIsUniform) {
  auto state = AcoState::initial(aco_space());
  state.exploration = 1.0;
  state.pheromone[0] = {1000.0, 1.0, 1.0, 1.0};
  Rng rng(4);
  EXPECT_LT(chi_square_uniform(draw_counts(state, 0, 10000, rng)), 16.27);
}

TEST(AcoUpdate, ZeroRewardIsPureEvaporation) {
  auto state = AcoState::initial(aco_space());
  state.evaporation = 0.3;
  state.pheromone[0] = {1.0, 2.0, 1e-3, 0.5};
  const auto before = state.pheromone;
  const DesignPoint ant{{1, 2}};
  const auto after = aco_update(state, {{ant, 0.0}, {ant, 0.0}});
  for (std::size_t i = 0; i < before.size(); ++i) {
    for (std::size_t v = 0; v < before[i].size(); ++v) {
      EXPECT_EQ(after.pheromone[i][v], std::max(state.pheromone_floor, 0.7 * before[i][v]));
    }
  }
}

TEST(AcoUpdate, FloorHoldsUnderLongEvaporation) {
  auto state = AcoState::initial(aco_space());
  state.evaporation = 0.5;
  for (int i = 0; i < 1000000; ++i) state = aco_update(std::move(state), {});
  for (const auto& tau : state.pheromone) {
    for (double t : tau) EXPECT_EQ(t, state.pheromone_floor);
  }
}

TEST(AcoUpdate, SingleAntHandEvaluated) {
  auto state = AcoState::initial(aco_space());
  state.evaporation = 0.1;
  state.deposit_scale = 1.0;
  const double r = 3.0;
  const auto after = aco_update(state, {{DesignPoint{{2, 1}}, r}});
  EXPECT_DOUBLE_EQ(after.pheromone[0][2], 0.9 + r / (1.0 + r));
  EXPECT_DOUBLE_EQ(after.pheromone[1][1], 0.9 + r / (1.0 + r));
  EXPECT_DOUBLE_EQ(after.pheromone[0][0], 0.9);
}

TEST(AcoUpdate, RejectsBadAnts) {
  const auto state = AcoState::initial(aco_space());
  EXPECT_THROW(aco_update(state, {{DesignPoint{{0, 0}}, -1.0}}), InvalidArgument);
  EXPECT_THROW(aco_update(state, {{DesignPoint{{0}}, 1.0}}), InvalidArgument);
}

TEST(AcoAgent, FloorAndNormalizationUnderRandomInterleavings) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto space = random_small_space(rng);
    const auto mode = rng.bernoulli(0.5) ? RewardMode::kBudgetDistance : RewardMode::kTargetProximity;
    AcoAgent agent({space, mode}, resolve_hyperparams("aco", {{"ants", double(1 + rng.below(5))},
                                                              {"evaporation", 0.05 + 0.9 * rng.uniform()}}));
    for (int step = 0; step < 300; ++step) {
      const auto p = agent.propose(rng);
      ASSERT_TRUE(space.contains(p));
      const double r = mode == RewardMode::kBudgetDistance ? -5.0 * rng.uniform() : 1e9 * rng.uniform();
      agent.observe(p, r);
      const auto& st = agent.state();
      for (std::size_t i = 0; i < st.pheromone.size(); ++i) {
        for (double t : st.pheromone[i]) EXPECT_GE(t, st.pheromone_floor);
        double total = 0.0;
        for (double pr : st.choice_probabilities(i)) total += pr;
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    }
  }
}

TEST(AcoAgent, ConcentratesOnRewardedValues) {
  const auto space = aco_space();
  AcoAgent agent({space}, resolve_hyperparams("aco", {{"exploration", 0.0}}));
  Rng rng(7);
  for (int i = 0; i < 400; ++i) {
    const auto p = agent.propose(rng);
    agent.observe(p, p.index[0] == 3 ? 10.0 : 0.0);
  }
  EXPECT_GT(agent.state().choice_probabilities(0)[3], 0.9);
}

TEST(AcoState, Validation) {
  AcoState s;
  s.evaporation = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.pheromone_floor = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.greediness = -1.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
}
