#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "support.hpp"

using namespace dsegym;

namespace {

struct Golden {
  const char* env;
  const char* workload;
  std::vector<std::pair<const char*, double>> metrics;
};

// Reference design of each fixture, pinned from the independent Python model.
const std::vector<Golden> kGolden = {
    {"dram", "stream", {{"latency", 3.46835503441356e-08}, {"power", 1.1901453080573607}, {"energy", 4.127846470884424e-08}}},
    {"dram", "random", {{"latency", 1.5243026244993688e-07}, {"power", 1.057906940495432}, {"energy", 1.6125703258732845e-07}}},
    {"dram", "cloud-1", {{"latency", 6.79491519193193e-08}, {"power", 1.32238367561929}, {"energy", 8.985484927028297e-08}}},
    {"dram", "cloud-2", {{"latency", 1.0043284173442536e-07}, {"power", 1.2562644918383252}, {"energy", 1.261702128853768e-07}}},
    {"accel", "alexnet_conv2", {{"latency", 0.0014035087719298245}, {"energy", 0.0008902184780701754}, {"area", 11.933919999999999}}},
    {"accel", "resnet50_conv3", {{"latency", 0.0007205513784461153}, {"energy", 0.0004621050501253133}, {"area", 11.933919999999999}}},
    {"accel", "mobilenet_dw", {{"latency", 0.00150390625}, {"energy", 0.0008599999374999999}, {"area", 11.933919999999999}}},
    {"soc", "audio_decoder", {{"power", 2.7652}, {"performance", 0.013190857142857143}, {"area", 6.811999999999999}}},
    {"soc", "edge_detection", {{"power", 2.7652}, {"performance", 0.012056547619047618}, {"area", 6.811999999999999}}},
    {"soc", "single_task", {{"power", 2.7652}, {"performance", 0.0016666666666666668}, {"area", 6.811999999999999}}},
};

struct Model {
  EnvFixture fixture;
  std::unique_ptr<CostModel> model;

  explicit Model(const std::string& env_id) : fixture(EnvFixture::load(env_id)), model(make_cost_model(fixture)) {}

  // Fixture defaults, then the reference design, then `overrides`.
  DesignPoint point(const NamedDesign& overrides) const {
    NamedDesign design;
    for (const auto& entry : named_from_json(fixture.doc.at("defaults"))) {
      if (model->space().find(entry.first)) design.push_back(entry);
    }
    auto layered = fixture.reference_design();
    layered.insert(layered.end(), overrides.begin(), overrides.end());
    for (const auto& [name, value] : layered) {
      bool replaced = false;
      for (auto& entry : design) {
        if (entry.first == name) {
          entry.second = value;
          replaced = true;
        }
      }
      if (!replaced) design.emplace_back(name, value);
    }
    return model->space().from_named(design);
  }

  Observation eval(const NamedDesign& overrides, const std::string& wid) const {
    return model->evaluate(point(overrides), fixture.workload(wid));
  }
};

// Full accelerator design with every knob spelled out.
NamedDesign accel_design(double pes, double glb, double wspad, const std::string& dataflow = "RowStationary") {
  return {{"NumPEs", pes},           {"GlobalBufferKB", glb},         {"WeightSPadWords", wspad},
          {"InputSPadWords", 12.0},  {"AccumSPadWords", 16.0},       {"Dataflow", dataflow},
          {"ClockMHz", 1000.0},      {"DramBandwidthGBs", 16.0}};
}

}  // namespace

TEST(Golden, ReferenceDesignPerWorkload) {
  for (const auto& g : kGolden) {
    const Model m(std::string(g.env) + "-small");
    const auto obs = m.model->evaluate(m.model->space().from_named(m.fixture.reference_design()),
                                       m.fixture.workload(g.workload));
    ASSERT_TRUE(obs.valid()) << g.env << "/" << g.workload;
    for (const auto& [name, value] : g.metrics) {
      EXPECT_NEAR(obs.at(name), value, 1e-12 * std::abs(value)) << g.env << "/" << g.workload << " " << name;
    }
  }
}

TEST(Golden, FullAndSmallDramAgreeOnTheReference) {
  const Model full("dram"), small("dram-small");
  for (const auto& wid : full.fixture.workload_ids()) {
    const auto a = full.model->evaluate(full.model->space().from_named(full.fixture.reference_design()),
                                        full.fixture.workload(wid));
    const auto b = small.model->evaluate(small.model->space().from_named(small.fixture.reference_design()),
                                         small.fixture.workload(wid));
    EXPECT_EQ(a, b);
  }
}

TEST(Dram, EnergyIsLatencyTimesPowerEverywhere) {
  const Model m("dram-small");
  for (const auto& wid : m.fixture.workload_ids()) {
    const auto wl = m.fixture.workload(wid);
    for (const auto& p : enumerate(m.model->space(), 4096)) {
      const auto obs = m.model->evaluate(p, wl);
      EXPECT_NEAR(obs.at("energy"), obs.at("latency") * obs.at("power"), 1e-15 * obs.at("energy"));
      EXPECT_GT(obs.at("latency"), 0.0);
      EXPECT_EQ(obs, m.model->evaluate(p, wl));
    }
  }
}

TEST(Dram, OptimumIsNotSeparable) {
  // Moving one parameter away from the optimum changes which value of some
  // other parameter is best, so no per-parameter decomposition exists.
  const Model m("dram-small");
  const auto& space = m.model->space();
  bool some_workload_interacts = false;
  for (const auto& wid : m.fixture.workload_ids()) {
    const auto wl = m.fixture.workload(wid);
    const auto spec = m.fixture.objective(wid, "low-latency");
    const auto best = brute_force_optimum(*m.model, wl, spec, Execution::kSerial);
    // Reward of each value of parameter i with the rest held at the optimum.
    for (std::size_t i = 0; i < space.size() && !some_workload_interacts; ++i) {
      std::vector<double> by_value;
      for (std::uint32_t v = 0; v < space[i].size(); ++v) {
        auto p = best.best_point;
        p.index[i] = v;
        by_value.push_back(score(spec, m.model->evaluate(p, wl)).reward);
      }
      for (std::size_t j = 0; j < space.size() && !some_workload_interacts; ++j) {
        if (j == i) continue;
        for (std::uint32_t w = 0; w < space[j].size(); ++w) {
          auto q = best.best_point;
          q.index[j] = w;
          std::size_t argmax_before = 0, argmax_after = 0;
          double after_best = -1.0;
          for (std::uint32_t v = 0; v < space[i].size(); ++v) {
            if (by_value[v] > by_value[argmax_before]) argmax_before = v;
            q.index[i] = v;
            const double r = score(spec, m.model->evaluate(q, wl)).reward;
            if (r > after_best) {
              after_best = r;
              argmax_after = v;
            }
          }
          if (argmax_before != argmax_after) some_workload_interacts = true;
        }
      }
    }
  }
  EXPECT_TRUE(some_workload_interacts);
}

TEST(Accel, DoublingPesHalvesComputeBoundLatency) {
  const Model m("accel");
  const auto& doc = m.fixture.doc;
  const double ops = doc.at("model").at("ops_per_pe_cycle");
  const double util = doc.at("model").at("dataflow").at("RowStationary").at("utilization");
  const auto wl = m.fixture.workload("alexnet_conv2");
  const double flops = wl.trait("flops");
  for (double pes : {14.0, 28.0, 56.0}) {
    const auto one = m.model->evaluate(m.model->space().from_named(accel_design(pes, 256, 64)), wl);
    const auto two = m.model->evaluate(m.model->space().from_named(accel_design(2 * pes, 256, 64)), wl);
    const double expected = flops / (pes * ops * util * 1e9);
    EXPECT_NEAR(one.at("latency"), expected, 1e-12 * expected);
    EXPECT_NEAR(two.at("latency"), expected / 2.0, 1e-12 * expected);
  }
}

TEST(Accel, MemoryBoundLatencyIgnoresPes) {
  const Model m("accel");
  const auto wl = m.fixture.workload("mobilenet_dw");
  const auto base = m.model->evaluate(m.model->space().from_named(accel_design(84, 256, 64)), wl);
  for (double pes : {112.0, 168.0, 252.0, 336.0}) {
    const auto obs = m.model->evaluate(m.model->space().from_named(accel_design(pes, 256, 64)), wl);
    ASSERT_TRUE(obs.valid());
    EXPECT_EQ(obs.at("latency"), base.at("latency"));
  }
}

TEST(Accel, AreaStrictlyIncreasesWithPes) {
  const Model m("accel");
  const auto wl = m.fixture.workload("alexnet_conv2");
  double previous = 0.0;
  for (double pes = 14; pes <= 336; pes += 14) {
    const auto obs = m.model->evaluate(m.model->space().from_named(accel_design(pes, 64, 32)), wl);
    ASSERT_TRUE(obs.valid()) << pes;
    EXPECT_GT(obs.at("area"), previous);
    previous = obs.at("area");
  }
}

TEST(Accel, OversizedBuffersAreInfeasibleAndScoreZero) {
  const Model m("accel");
  const auto wl = m.fixture.workload("alexnet_conv2");
  const double budget_bytes = double(m.fixture.doc.at("model").at("on_chip_budget_kb")) * 1024.0;
  const double bytes = 512 * 1024.0 + 336 * (64 + 12 + 16) * 2.0;
  ASSERT_GT(bytes, budget_bytes);
  EXPECT_FALSE(m.model->evaluate(m.model->space().from_named(accel_design(336, 512, 64)), wl).valid());

  auto env = make_environment({"accel-small", "alexnet_conv2", "low-latency", {}});
  const auto p = env->space().from_named({{"NumPEs", 336.0}, {"GlobalBufferKB", 512.0}, {"WeightSPadWords", 128.0},
                                          {"Dataflow", std::string("RowStationary")}});
  const auto step = env->step(p);
  EXPECT_EQ(step.reward, 0.0);
  EXPECT_EQ(step.info.at("infeasible"), "true");
}

TEST(Accel, SmallSpaceHasSomeInfeasiblePoints) {
  const auto r = brute_force_optimum("accel-small", "alexnet_conv2", "low-latency", Execution::kSerial);
  EXPECT_GT(r.infeasible, 0u);
  EXPECT_LT(r.infeasible, r.points);
}

TEST(Soc, SingleTaskRunsOnTheFastestPe) {
  const Model m("soc");
  const auto& types = m.fixture.doc.at("model").at("pe_types");
  const auto wl = m.fixture.workload("single_task");
  const auto& task = m.fixture.doc.at("workloads")[2].at("tasks")[0];
  ASSERT_EQ(task.at("kind"), "audio");
  double fastest = 0.0;
  for (const auto& [name, t] : types.items()) fastest = std::max(fastest, t.at("rates").at("audio").get<double>());
  const double expected = task.at("work").get<double>() / fastest;

  NamedDesign all_types{{"PE0", std::string("A53")}, {"PE1", std::string("A72")}, {"PE2", std::string("DSP")},
                        {"PE3", std::string("ImageAccel")}};
  const auto obs = m.eval(all_types, "single_task");
  EXPECT_NEAR(obs.at("performance"), expected, 1e-15);
  EXPECT_NEAR(obs.at("performance"), 1.0 / 600.0, 1e-15);
  EXPECT_EQ(wl.trait("task_count"), 1.0);
}

TEST(Soc, UnusedPeAddsAreaAndPowerOnly) {
  const Model m("soc");
  const NamedDesign alone{{"PE0", std::string("DSP")}, {"PE1", std::string("None")}, {"PE2", std::string("None")}};
  for (const char* extra : {"A53", "A72", "ImageAccel"}) {
    const NamedDesign with{{"PE0", std::string("DSP")}, {"PE1", std::string(extra)}, {"PE2", std::string("None")}};
    const auto a = m.eval(alone, "single_task");
    const auto b = m.eval(with, "single_task");
    EXPECT_GT(b.at("area"), a.at("area"));
    EXPECT_GT(b.at("power"), a.at("power"));
    EXPECT_EQ(b.at("performance"), a.at("performance"));
  }
}

TEST(Soc, BudgetMatchingPointScoresZero) {
  const Model m("soc-small");
  const auto p = m.model->space().from_named(m.fixture.reference_design());
  const auto obs = m.model->evaluate(p, m.fixture.workload("audio_decoder"));
  const auto spec = RewardSpec::budget_distance(
      {{"performance", obs.at("performance"), 1.0}, {"power", obs.at("power"), 1.0}, {"area", obs.at("area"), 1.0}});
  const auto env = std::make_unique<GymEnv>(std::shared_ptr<const CostModel>(make_cost_model(m.fixture)),
                                            m.fixture.workload("audio_decoder"), spec);
  const auto step = env->step(p);
  EXPECT_EQ(step.reward, 0.0);
  EXPECT_FALSE(std::signbit(step.reward));
}

TEST(Envs, SmallVariantsAreTractable) {
  for (const char* env : {"dram-small", "accel-small", "soc-small"}) {
    const auto fixture = EnvFixture::load(env);
    const auto model = make_cost_model(fixture);
    EXPECT_LE(cardinality(model->space()), 4096) << env;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& wid : fixture.workload_ids()) {
      for (const auto& obj : fixture.objective_names(wid)) {
        brute_force_optimum(*model, fixture.workload(wid), fixture.objective(wid, obj), Execution::kSerial);
      }
    }
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0) << env;
  }
}

TEST(Envs, EveryFixtureObservationIsFiniteAndPositive) {
  for (const char* env : {"dram-small", "accel-small", "soc-small"}) {
    const Model m(env);
    for (const auto& wid : m.fixture.workload_ids()) {
      const auto wl = m.fixture.workload(wid);
      for (const auto& p : enumerate(m.model->space(), 4096)) {
        const auto obs = m.model->evaluate(p, wl);
        for (const auto& metric : obs.metrics()) EXPECT_GT(metric.value, 0.0) << env << " " << metric.name;
      }
    }
  }
}

TEST(Envs, InvalidPointThrows) {
  for (const char* env : {"dram", "accel", "soc"}) {
    const Model m(env);
    DesignPoint bad{std::vector<std::uint32_t>(m.model->space().size(), 0)};
    bad.index[0] = 999;
    EXPECT_THROW(m.model->evaluate(bad, m.fixture.workload(m.fixture.workload_ids().front())), InvalidArgument);
    bad.index.pop_back();
    EXPECT_THROW(m.model->evaluate(bad, m.fixture.workload(m.fixture.workload_ids().front())), InvalidArgument);
  }
}

TEST(Envs, UnknownNamesAreRejected) {
  EXPECT_THROW(EnvFixture::load("nosuch"), InvalidArgument);
  EXPECT_THROW(EnvFixture::load("dram-huge"), InvalidArgument);
  EXPECT_THROW(make_environment({"dram-small", "nosuch", "low-latency", {}}), InvalidArgument);
  EXPECT_THROW(make_environment({"dram-small", "stream", "nosuch", {}}), InvalidArgument);
  EXPECT_EQ(parse_env_id("accel"), (std::pair<std::string, std::string>{"accel", "full"}));
  EXPECT_EQ(parse_env_id("soc-small"), (std::pair<std::string, std::string>{"soc", "small"}));
}

TEST(Episode, DefaultLengthIsDoneEveryStep) {
  auto env = make_environment({});
  Rng rng(1);
  const auto initial = env->reset();
  for (int i = 0; i < 5; ++i) {
    const auto r = env->step(sample_uniform(env->space(), rng));
    EXPECT_TRUE(r.done);
    EXPECT_EQ(env->reset(), initial);
  }
}

TEST(Episode, LongerEpisodesRollOver) {
  EnvRequest req;
  req.options.episode_length = 3;
  auto env = make_environment(req);
  env->reset();
  Rng rng(2);
  std::vector<bool> done;
  for (int i = 0; i < 7; ++i) done.push_back(env->step(sample_uniform(env->space(), rng)).done);
  EXPECT_EQ(done, (std::vector<bool>{false, false, true, false, false, true, false}));
  req.options.episode_length = 0;
  EXPECT_THROW(make_environment(req), InvalidArgument);
}

TEST(Episode, ResetRestoresFreshBehaviour) {
  auto a = make_environment({"soc-small", "audio_decoder", "budget", {}});
  auto b = make_environment({"soc-small", "audio_decoder", "budget", {}});
  Rng rng(3);
  std::vector<DesignPoint> points;
  for (int i = 0; i < 20; ++i) points.push_back(sample_uniform(a->space(), rng));
  for (const auto& p : points) a->step(p);
  a->reset();
  b->reset();
  for (const auto& p : points) {
    const auto ra = a->step(p);
    const auto rb = b->step(p);
    EXPECT_EQ(ra.reward, rb.reward);
    EXPECT_EQ(ra.observation, rb.observation);
    EXPECT_EQ(ra.done, rb.done);
  }
}

TEST(Episode, StepDelayIsApplied) {
  EnvRequest req;
  req.options.step_delay = std::chrono::milliseconds(20);
  auto env = make_environment(req);
  Rng rng(4);
  const auto start = std::chrono::steady_clock::now();
  env->step(sample_uniform(env->space(), rng));
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(20));
}

TEST(Episode, ObjectiveMustUseModelMetrics) {
  const auto fixture = EnvFixture::load("dram-small");
  std::shared_ptr<const CostModel> model = make_cost_model(fixture);
  EXPECT_THROW(GymEnv(model, fixture.workload("stream"), RewardSpec::reciprocal("area")), InvalidArgument);
}
