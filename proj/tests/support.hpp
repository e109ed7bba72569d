#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "dsegym/dsegym.hpp"

namespace dsegym::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dsegym-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Random space with 1-4 parameters and at most a few hundred points.
inline ParameterSpace random_small_space(Rng& rng) {
  std::vector<ParameterSpec> params;
  const auto n = 1 + rng.below(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::string name = "p" + std::to_string(i);
    if (rng.bernoulli(0.5)) {
      std::vector<std::string> values;
      const auto k = 1 + rng.below(5);
      for (std::uint64_t v = 0; v < k; ++v) values.push_back("v" + std::to_string(v));
      params.push_back(ParameterSpec::categorical(name, values));
    } else {
      const double min = static_cast<double>(rng.below(10));
      const double step = 0.5 * static_cast<double>(1 + rng.below(4));
      const double max = min + step * static_cast<double>(rng.below(6)) + (rng.bernoulli(0.3) ? step / 3.0 : 0.0);
      params.push_back(ParameterSpec::numeric(name, min, max, step));
    }
  }
  return ParameterSpace(std::move(params));
}

inline TrajectoryRecord make_record(const std::string& experiment, std::uint64_t step, const std::string& agent = "RW",
                                    const std::string& env = "dram-small") {
  TrajectoryRecord r;
  r.experiment_id = experiment;
  r.env_id = env;
  r.workload_id = "stream";
  r.agent_type = agent;
  r.hyperparam_digest = "00";
  r.step_index = step;
  r.design = {{"A", std::string("x")}, {"B", 1.0}};
  r.observation = {{"latency", 1.0 + static_cast<double>(step)}};
  r.reward = 0.5;
  return r;
}

}  // namespace dsegym::testing
