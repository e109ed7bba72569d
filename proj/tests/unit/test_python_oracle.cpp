// Cross-checks the C++ cost models against an independent Python transcription.
#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <memory>
#include <sstream>

#include "support.hpp"

using namespace dsegym;

namespace {

std::string capture(const std::string& args) {
  const std::string cmd = "python3 " + std::string(ORACLE_SCRIPT) + " " + args;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe.get())) out += buf.data();
  return out;
}

void expect_relative(double expected, double actual, const std::string& what) {
  EXPECT_LE(std::abs(expected - actual), 1e-12 * std::max(1e-300, std::abs(expected))) << what;
}

}  // namespace

TEST(PythonOracle, ReferenceDesignObservationsAgree) {
  std::istringstream lines(capture("golden"));
  std::string line;
  int checked = 0;
  while (std::getline(lines, line)) {
    const auto space_at = line.find(' ');
    const auto key = line.substr(0, space_at);
    const auto slash = key.find('/');
    const auto env = key.substr(0, slash), workload = key.substr(slash + 1);
    const auto expected = Json::parse(line.substr(space_at + 1));

    const auto fixture = EnvFixture::load(env + "-small");
    const auto model = make_cost_model(fixture);
    const auto point = fixture.space().from_named(fixture.reference_design());
    const auto obs = model->evaluate(point, fixture.workload(workload));
    ASSERT_TRUE(obs.valid()) << key;
    for (const auto& [metric, text] : expected.items()) {
      expect_relative(std::stod(text.get<std::string>()), obs.at(metric), key + "/" + metric);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 10);
}

TEST(PythonOracle, ExhaustiveOptimaAgreeOnEverySmallSpace) {
  for (const char* env : {"dram-small", "accel-small", "soc-small"}) {
    const auto fixture = EnvFixture::load(env);
    for (const auto& workload : fixture.workload_ids()) {
      for (const auto& objective : fixture.objective_names(workload)) {
        const auto label = std::string(env) + " " + workload + " " + objective;
        std::istringstream out(capture("optimum " + label));
        double reward = 0.0;
        std::uint64_t count = 0;
        out >> reward >> count;
        ASSERT_TRUE(out) << label;
        const auto oracle = brute_force_optimum(env, workload, objective);
        EXPECT_EQ(oracle.points, count) << label;
        expect_relative(reward, oracle.best_reward, label);
      }
    }
  }
}
