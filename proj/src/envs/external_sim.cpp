#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include "dsegym/envs.hpp"

namespace dsegym {

namespace {

void close_fd(int& fd) noexcept {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

}  // namespace

void AdapterConfig::validate() const {
  if (command.empty() || command.front().empty()) throw InvalidArgument("simulator command is empty");
  if (timeout.count() <= 0) throw InvalidArgument("simulator timeout must be positive");
  if (max_restarts < 0) throw InvalidArgument("max_restarts must be >= 0");
}

ExternalSimulator::ExternalSimulator(AdapterConfig config) : config_(std::move(config)) { config_.validate(); }

ExternalSimulator::~ExternalSimulator() { stop(); }

void ExternalSimulator::launch() {
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) fail(SimulatorError::Kind::kLaunch, "pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    fail(SimulatorError::Kind::kLaunch, "pipe failed");
  }

  std::vector<char*> argv;
  for (auto& arg : config_.command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    fail(SimulatorError::Kind::kLaunch, "fork failed");
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::signal(SIGPIPE, SIG_DFL);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void ExternalSimulator::start() {
  if (running()) return;
  launch();
  const auto deadline = std::chrono::steady_clock::now() + config_.timeout;
  auto line = read_line(deadline);
  if (!line) fail(SimulatorError::Kind::kCrashed, "simulator crashed during handshake");
  Json hello;
  try {
    hello = Json::parse(*line);
  } catch (const Json::exception&) {
    fail(SimulatorError::Kind::kProtocol, "protocol error: malformed handshake", *line);
  }
  if (!hello.is_object() || hello.value("protocol", 0) != 1 || !hello.contains("metrics") ||
      !hello.at("metrics").is_array()) {
    fail(SimulatorError::Kind::kProtocol, "protocol error: bad handshake", *line);
  }
  metrics_.clear();
  for (const auto& m : hello.at("metrics")) {
    if (!m.is_string()) fail(SimulatorError::Kind::kProtocol, "protocol error: metric names must be strings", *line);
    metrics_.push_back(m.get<std::string>());
  }
}

void ExternalSimulator::stop() noexcept {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
  pid_ = -1;
  buffer_.clear();
}

void ExternalSimulator::fail(SimulatorError::Kind kind, const std::string& message, std::string raw) {
  stop();
  throw SimulatorError(kind, message, std::move(raw));
}

std::optional<std::string> ExternalSimulator::read_line(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) fail(SimulatorError::Kind::kTimeout, "simulator timeout");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(SimulatorError::Kind::kCrashed, "simulator crashed: poll failed");
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return std::nullopt;
    }
    if (n == 0) return std::nullopt;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalSimulator::write_line(const std::string& line) {
  const std::string payload = line + "\n";
  std::size_t off = 0;
  while (off < payload.size()) {
    const ssize_t n = ::write(to_child_, payload.data() + off, payload.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(SimulatorError::Kind::kCrashed, "simulator crashed");
    }
    off += static_cast<std::size_t>(n);
  }
}

Observation ExternalSimulator::request(const NamedDesign& design, const std::string& workload_id) {
  if (!running()) {
    if (next_id_ > 0) {
      // The child died on an earlier request; relaunch within the budget.
      if (restarts_ >= config_.max_restarts) {
        throw SimulatorError(SimulatorError::Kind::kCrashed, "simulator crashed: restart limit reached");
      }
      ++restarts_;
    }
    start();
  }

  const std::int64_t id = next_id_++;
  Json req;
  req["id"] = id;
  req["design"] = named_to_json(design);
  req["workload"] = workload_id;
  write_line(req.dump());

  const auto deadline = std::chrono::steady_clock::now() + config_.timeout;
  auto line = read_line(deadline);
  if (!line) fail(SimulatorError::Kind::kCrashed, "simulator crashed");

  Json resp;
  try {
    resp = Json::parse(*line);
  } catch (const Json::exception&) {
    fail(SimulatorError::Kind::kProtocol, "protocol error: malformed response", *line);
  }
  if (!resp.is_object() || !resp.contains("id") || !resp.at("id").is_number_integer() ||
      resp.at("id").get<std::int64_t>() != id || !resp.contains("valid") || !resp.at("valid").is_boolean()) {
    fail(SimulatorError::Kind::kProtocol, "protocol error: bad response envelope", *line);
  }
  if (!resp.at("valid").get<bool>()) return Observation::infeasible();
  if (!resp.contains("metrics") || !resp.at("metrics").is_object()) {
    fail(SimulatorError::Kind::kProtocol, "protocol error: missing metrics", *line);
  }
  Observation obs;
  const auto& metrics = resp.at("metrics");
  for (const auto& name : metrics_) {
    if (!metrics.contains(name) || !metrics.at(name).is_number() || !std::isfinite(metrics.at(name).get<double>())) {
      fail(SimulatorError::Kind::kProtocol, "protocol error: metric '" + name + "' missing or not finite", *line);
    }
    obs.set(name, metrics.at(name).get<double>());
  }
  return obs;
}

Observation external_sim_step(ExternalSimulator& sim, const ParameterSpace& space, const DesignPoint& point,
                              const WorkloadSpec& workload) {
  space.validate(point);
  return sim.request(space.named(point), workload.id);
}

ExternalSimEnv::ExternalSimEnv(AdapterConfig config, ParameterSpace space, WorkloadSpec workload, RewardSpec reward,
                               EnvOptions options)
    : sim_(std::move(config)),
      space_(std::move(space)),
      workload_(std::move(workload)),
      reward_(std::move(reward)),
      options_(options) {
  if (options_.episode_length < 1) throw InvalidArgument("episode_length must be >= 1");
  workload_.validate();
  reward_.validate();
}

Observation ExternalSimEnv::reset() {
  steps_in_episode_ = 0;
  return Observation{};
}

StepResult ExternalSimEnv::step(const DesignPoint& point) {
  if (options_.step_delay.count() > 0) std::this_thread::sleep_for(options_.step_delay);
  if (steps_in_episode_ >= options_.episode_length) steps_in_episode_ = 0;
  StepResult out;
  out.observation = external_sim_step(sim_, space_, point, workload_);
  const auto scored = score(reward_, out.observation);
  out.reward = scored.reward;
  out.info["infeasible"] = scored.infeasible ? "true" : "false";
  out.done = ++steps_in_episode_ >= options_.episode_length;
  return out;
}

}  // namespace dsegym
