#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsegym/core.hpp"
#include "dsegym/error.hpp"
#include "dsegym/json_io.hpp"
#include "dsegym/spaces.hpp"

namespace dsegym {

// Pure function (design point, workload) -> metric vector over one space.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual const std::string& id() const = 0;
  virtual const ParameterSpace& space() const = 0;
  virtual std::vector<std::string> metric_names() const = 0;
  // Throws InvalidArgument when `point` is not in space().
  virtual Observation evaluate(const DesignPoint& point, const WorkloadSpec& workload) const = 0;
};

// A synthetic fixture document (data/envs/<name>.json) plus the chosen space
// variant. Workloads and named objectives ship in the same document.
struct EnvFixture {
  std::string name;     // "dram", "accel", "soc"
  std::string variant;  // "full" or "small"
  Json doc;

  static EnvFixture load(const std::string& env_id);
  static EnvFixture from_json(std::string name, std::string variant, Json doc);

  ParameterSpace space() const;
  std::vector<std::string> workload_ids() const;
  WorkloadSpec workload(const std::string& id) const;
  std::vector<std::string> objective_names(const std::string& workload_id) const;
  RewardSpec objective(const std::string& workload_id, const std::string& objective) const;
  NamedDesign reference_design() const;
};

// Splits "dram-small" into {"dram", "small"}; a bare name means "full".
std::pair<std::string, std::string> parse_env_id(const std::string& env_id);

std::unique_ptr<CostModel> make_dram_model(const EnvFixture& fixture);
std::unique_ptr<CostModel> make_accel_model(const EnvFixture& fixture);
std::unique_ptr<CostModel> make_soc_model(const EnvFixture& fixture);
std::unique_ptr<CostModel> make_cost_model(const EnvFixture& fixture);

struct EnvOptions {
  int episode_length = 1;
  // Artificial per-step delay standing in for a slow simulator.
  std::chrono::microseconds step_delay{0};
  std::uint64_t seed = 0;
};

// Gym-style environment over a CostModel with a fixed workload and objective.
class GymEnv final : public Environment {
 public:
  GymEnv(std::shared_ptr<const CostModel> model, WorkloadSpec workload, RewardSpec reward, EnvOptions options = {});

  Observation reset() override;
  StepResult step(const DesignPoint& point) override;
  const ParameterSpace& space() const override { return model_->space(); }
  const WorkloadSpec& workload() const override { return workload_; }
  const RewardSpec& reward_spec() const override { return reward_; }
  std::string id() const override { return model_->id(); }

  const CostModel& model() const { return *model_; }
  const EnvOptions& options() const { return options_; }

 private:
  std::shared_ptr<const CostModel> model_;
  WorkloadSpec workload_;
  RewardSpec reward_;
  EnvOptions options_;
  int steps_in_episode_ = 0;
};

// Everything needed to build a built-in environment by name.
struct EnvRequest {
  std::string env_id = "dram-small";
  std::string workload_id;  // empty: the fixture's first workload
  std::string objective = "low-latency";
  EnvOptions options;
};

std::unique_ptr<GymEnv> make_environment(const EnvRequest& request);

// ---------------------------------------------------------------------------
// External simulator adapter: a child process speaking line-delimited JSON on
// stdin/stdout. Handshake {"protocol":1,"metrics":[...]}; request
// {"id":n,"design":{...},"workload":"w"}; response {"id":n,"metrics":{...},"valid":b}.

struct AdapterConfig {
  std::vector<std::string> command;  // argv; command[0] is looked up on PATH
  std::chrono::milliseconds timeout{5000};
  int max_restarts = 0;

  void validate() const;
};

class SimulatorError : public Error {
 public:
  enum class Kind { kTimeout, kProtocol, kCrashed, kLaunch };

  SimulatorError(Kind kind, const std::string& message, std::string raw = {})
      : Error(message), kind_(kind), raw_(std::move(raw)) {}

  Kind kind() const noexcept { return kind_; }
  // Offending payload for protocol errors.
  const std::string& raw() const noexcept { return raw_; }

 private:
  Kind kind_;
  std::string raw_;
};

// Owns exactly one child process; requests are strictly serialized.
class ExternalSimulator {
 public:
  explicit ExternalSimulator(AdapterConfig config);
  ~ExternalSimulator();
  ExternalSimulator(const ExternalSimulator&) = delete;
  ExternalSimulator& operator=(const ExternalSimulator&) = delete;

  // Launches the child (if needed) and completes the handshake.
  void start();
  void stop() noexcept;
  bool running() const noexcept { return pid_ > 0; }

  Observation request(const NamedDesign& design, const std::string& workload_id);

  const std::vector<std::string>& metric_names() const noexcept { return metrics_; }
  int restarts() const noexcept { return restarts_; }

 private:
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline);
  void write_line(const std::string& line);
  [[noreturn]] void fail(SimulatorError::Kind kind, const std::string& message, std::string raw = {});
  void launch();

  AdapterConfig config_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::vector<std::string> metrics_;
  std::int64_t next_id_ = 0;
  int restarts_ = 0;
};

// One request/response exchange: the free-function form of the adapter.
Observation external_sim_step(ExternalSimulator& sim, const ParameterSpace& space, const DesignPoint& point,
                              const WorkloadSpec& workload);

// Environment backed by an external simulator process.
class ExternalSimEnv final : public Environment {
 public:
  ExternalSimEnv(AdapterConfig config, ParameterSpace space, WorkloadSpec workload, RewardSpec reward,
                 EnvOptions options = {});

  Observation reset() override;
  StepResult step(const DesignPoint& point) override;
  const ParameterSpace& space() const override { return space_; }
  const WorkloadSpec& workload() const override { return workload_; }
  const RewardSpec& reward_spec() const override { return reward_; }
  std::string id() const override { return "external"; }

 private:
  ExternalSimulator sim_;
  ParameterSpace space_;
  WorkloadSpec workload_;
  RewardSpec reward_;
  EnvOptions options_;
  int steps_in_episode_ = 0;
};

}  // namespace dsegym
