#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "support.hpp"

using namespace dsegym;
using dsegym::testing::make_record;
using dsegym::testing::TempDir;

namespace {

// Awkward reals that only survive a shortest-round-trip encoding.
TrajectoryRecord awkward_record(Rng& rng, const std::string& experiment, std::uint64_t step) {
  auto r = make_record(experiment, step, "GA");
  r.seed = rng();
  r.hyperparam_digest = "ab12";
  r.design = {{"PagePolicy", std::string("Open \"quoted\" ,comma")}, {"Size", 0.1 + 0.2}, {"Tiny", 5e-324}};
  r.observation = {{"latency", rng.uniform() * 1e-7}, {"power", 1.0 / 3.0}, {"energy", -0.0}};
  r.reward = std::nextafter(1.0, 2.0);
  r.wall_time_ms = static_cast<std::int64_t>(rng.below(1000000));
  return r;
}

Dataset make_dataset(const std::string& agent, std::size_t n, const std::string& env = "dram-small",
                     const std::string& prefix = "e") {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) d.push_back(make_record(prefix + agent, i, agent, env));
  return d;
}

void write_lines(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST(Record, LineRoundTripIsBitExact) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto r = awkward_record(rng, "exp", static_cast<std::uint64_t>(i));
    const auto line = record_to_line(r);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const auto back = record_from_line(line);
    EXPECT_EQ(back, r);
    EXPECT_EQ(record_to_line(back), line);
    EXPECT_TRUE(std::signbit(back.observation[2].second));
  }
}

TEST(Record, FieldNamesAreExact) {
  const auto doc = Json::parse(record_to_line(make_record("x", 0)));
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"schema_version", "experiment_id", "env_id", "workload_id", "agent_type",
                                            "hyperparam_digest", "seed", "step_index", "design", "observation",
                                            "reward", "wall_time_ms"}));
}

TEST(Record, Validation) {
  auto r = make_record("x", 0);
  r.reward = std::numeric_limits<double>::infinity();
  EXPECT_THROW(r.validate(), InvalidArgument);
  r = make_record("x", 0, "rw");
  EXPECT_THROW(r.validate(), InvalidArgument);
  r = make_record("", 0);
  EXPECT_THROW(r.validate(), InvalidArgument);
  EXPECT_THROW(record_from_line("{\"schema_version\":1}"), InvalidArgument);
  EXPECT_THROW(record_from_line("not json"), InvalidArgument);
  EXPECT_EQ(agent_label("aco"), "ACO");
  EXPECT_EQ(agent_type_from_label("BO"), "bo");
  EXPECT_THROW(agent_label("sgd"), InvalidArgument);
}

TEST(Writer, AppendThenReadBack) {
  TempDir dir;
  Rng rng(2);
  std::vector<TrajectoryRecord> written;
  {
    TrajectoryWriter w(dir / "t.jsonl");
    for (int i = 0; i < 50; ++i) {
      written.push_back(awkward_record(rng, "exp", static_cast<std::uint64_t>(i)));
      w.append(written.back());
    }
    EXPECT_EQ(w.appended(), 50u);
  }
  const auto loaded = load_trajectory_file(dir / "t.jsonl");
  EXPECT_TRUE(loaded.warnings.empty());
  EXPECT_EQ(loaded.dataset.records(), written);
  EXPECT_NO_THROW(check_step_sequence(loaded.dataset));
}

TEST(Writer, HundredThousandAppendsAndTruncatedTail) {
  TempDir dir;
  const auto path = dir / "big.jsonl";
  const std::size_t n = 100000;
  {
    TrajectoryWriter w(path);
    for (std::size_t i = 0; i < n; ++i) w.append(make_record("big", i));
  }
  {
    std::ifstream in(path);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, n);
  }
  // Chop the final record in half, as a crash mid-write would.
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 40);
  const auto loaded = load_trajectory_file(path);
  EXPECT_EQ(loaded.dataset.size(), n - 1);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  EXPECT_NE(loaded.warnings[0].find("truncated"), std::string::npos);

  // Reopening drops the partial line before appending.
  {
    TrajectoryWriter w(path);
    w.append(make_record("big", n - 1));
  }
  const auto again = load_trajectory_file(path);
  EXPECT_TRUE(again.warnings.empty());
  EXPECT_EQ(again.dataset.size(), n);
  EXPECT_NO_THROW(check_step_sequence(again.dataset));
}

TEST(Loader, RejectsDuplicatesAndMidFileCorruption) {
  TempDir dir;
  const auto a = record_to_line(make_record("x", 0));
  const auto b = record_to_line(make_record("x", 1));
  write_lines(dir / "dup.jsonl", a + "\n" + b + "\n" + a + "\n");
  EXPECT_THROW(load_trajectory_file(dir / "dup.jsonl"), InvalidArgument);
  write_lines(dir / "mid.jsonl", a + "\n{broken\n" + b + "\n");
  EXPECT_THROW(load_trajectory_file(dir / "mid.jsonl"), InvalidArgument);
  write_lines(dir / "tail.jsonl", a + "\n{broken\n");
  EXPECT_THROW(load_trajectory_file(dir / "tail.jsonl"), InvalidArgument);
  EXPECT_THROW(load_trajectory_file(dir / "missing.jsonl"), Error);
}

TEST(Loader, StepSequenceCheck) {
  Dataset d;
  d.push_back(make_record("x", 0));
  d.push_back(make_record("x", 2));
  EXPECT_THROW(check_step_sequence(d), InvalidArgument);
  Dataset ok;
  ok.push_back(make_record("x", 0));
  ok.push_back(make_record("y", 0));
  ok.push_back(make_record("x", 1));
  EXPECT_NO_THROW(check_step_sequence(ok));
}

TEST(DatasetFile, SaveLoadRoundTrip) {
  TempDir dir;
  Rng rng(3);
  Dataset d;
  for (int e = 0; e < 3; ++e) {
    for (int s = 0; s < 20; ++s) d.push_back(awkward_record(rng, "exp" + std::to_string(e), std::uint64_t(s)));
  }
  save_dataset(d, dir / "d.jsonl");
  EXPECT_EQ(load_trajectory_file(dir / "d.jsonl").dataset, d);
}

TEST(Provenance, CountsSumToRecords) {
  Dataset d;
  d.push_back(make_record("a", 0, "RW"));
  d.push_back(make_record("a", 1, "RW"));
  d.push_back(make_record("b", 0, "GA"));
  std::size_t total = 0;
  for (const auto& [key, count] : d.provenance()) total += count;
  EXPECT_EQ(total, d.size());
  EXPECT_EQ(d.provenance().at({"RW", "a"}), 2u);
  EXPECT_EQ(d.agent_counts().at("GA"), 1u);
  EXPECT_EQ(d.env_id(), "dram-small");
}

TEST(Merge, CountsIdentityAndErrors) {
  const auto a = make_dataset("RW", 100);
  const auto b = make_dataset("GA", 50);
  const auto m = merge({a, b});
  EXPECT_EQ(m.size(), 150u);
  EXPECT_EQ(m.agent_counts().at("RW"), 100u);
  EXPECT_EQ(merge({a}), a);
  try {
    merge({a, make_dataset("GA", 5, "accel-small")});
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "cannot merge across environments");
  }
}

TEST(Merge, AssociativeAndOrderPreserving) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Dataset> parts;
    for (int k = 0; k < 3; ++k) {
      parts.push_back(make_dataset(k == 0 ? "RW" : k == 1 ? "GA" : "BO", rng.below(30), "dram-small",
                                   "t" + std::to_string(trial)));
    }
    const auto left = merge({merge({parts[0], parts[1]}), parts[2]});
    const auto right = merge({parts[0], merge({parts[1], parts[2]})});
    EXPECT_EQ(left, right);
    std::size_t offset = 0;
    for (const auto& p : parts) {
      for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(left[offset + i], p[i]);
      offset += p.size();
    }
  }
}

TEST(Mixture, AcoOnly) {
  std::map<std::string, Dataset> sources{{"ACO", make_dataset("ACO", 500)}};
  Rng rng(5);
  const auto d = sample_mixture(sources, {{"ACO", 1.0}}, 300, rng);
  EXPECT_EQ(d.size(), 300u);
  EXPECT_EQ(d.agent_counts().at("ACO"), 300u);
  std::set<std::uint64_t> steps;
  for (const auto& r : d.records()) steps.insert(r.step_index);
  EXPECT_EQ(steps.size(), 300u);
}

TEST(Mixture, ExactQuartersAndDeterminism) {
  std::map<std::string, Dataset> sources;
  for (const char* a : {"ACO", "GA", "RW", "BO"}) sources[a] = make_dataset(a, 400);
  const std::map<std::string, double> quarters{{"ACO", .25}, {"GA", .25}, {"RW", .25}, {"BO", .25}};
  Rng rng(6), again(6);
  const auto d = sample_mixture(sources, quarters, 1000, rng);
  for (const char* a : {"ACO", "GA", "RW", "BO"}) EXPECT_EQ(d.agent_counts().at(a), 250u);
  EXPECT_EQ(d, sample_mixture(sources, quarters, 1000, again));
}

TEST(Mixture, RoundingResidueGoesToTheLargestShare) {
  std::map<std::string, Dataset> sources;
  for (const char* a : {"ACO", "GA", "RW"}) sources[a] = make_dataset(a, 100);
  Rng rng(7);
  const auto d = sample_mixture(sources, {{"ACO", 0.5}, {"GA", 0.25}, {"RW", 0.25}}, 10, rng);
  // round(2.5) twice gives 3 + 3 + 5 = 11; the excess comes off ACO.
  EXPECT_EQ(d.size(), 10u);
  std::size_t total = 0;
  for (const auto& [agent, count] : d.agent_counts()) total += count;
  EXPECT_EQ(total, 10u);
  EXPECT_EQ(d.agent_counts().at("ACO"), 10u - d.agent_counts().at("GA") - d.agent_counts().at("RW"));
  EXPECT_GE(d.agent_counts().at("ACO"), 4u);
}

TEST(Mixture, ProvenanceMatchesRequestedProportions) {
  Rng rng(8);
  std::map<std::string, Dataset> sources;
  for (const char* a : {"ACO", "GA", "RW", "BO"}) sources[a] = make_dataset(a, 2000);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::string, double> props;
    double total = 0.0;
    for (const char* a : {"ACO", "GA", "RW", "BO"}) total += props[a] = 0.1 + rng.uniform();
    for (auto& [a, p] : props) p /= total;
    const auto size = 100 + rng.below(1500);
    const auto d = sample_mixture(sources, props, size, rng);
    EXPECT_EQ(d.size(), size);
    for (const auto& [a, p] : props) {
      EXPECT_LE(std::abs(double(d.agent_counts()[a]) - p * double(size)), 2.0) << a;
    }
  }
}

TEST(Mixture, Errors) {
  std::map<std::string, Dataset> sources{{"ACO", make_dataset("ACO", 10)}, {"GA", make_dataset("GA", 10)}};
  Rng rng(9);
  try {
    sample_mixture(sources, {{"ACO", 0.5}, {"GA", 0.5}}, 100, rng);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("ACO"), std::string::npos);
  }
  EXPECT_THROW(sample_mixture(sources, {{"ACO", 0.5}, {"GA", 0.4}}, 10, rng), InvalidArgument);
  EXPECT_THROW(sample_mixture(sources, {{"BO", 1.0}}, 5, rng), InvalidArgument);
}

TEST(Split, SizesDisjointnessAndDeterminism) {
  const auto d = make_dataset("RW", 1000);
  Rng rng(10), again(10);
  const auto s = split(d, 0.2, rng);
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.test.size(), 200u);
  std::set<std::pair<std::string, std::uint64_t>> train_keys, all;
  for (const auto& r : s.train.records()) train_keys.insert({r.experiment_id, r.step_index});
  for (const auto& r : s.test.records()) EXPECT_EQ(train_keys.count({r.experiment_id, r.step_index}), 0u);
  for (const auto& part : {s.train, s.test}) {
    for (const auto& r : part.records()) all.insert({r.experiment_id, r.step_index});
  }
  EXPECT_EQ(all.size(), 1000u);
  const auto t = split(d, 0.2, again);
  EXPECT_EQ(t.train, s.train);
  EXPECT_EQ(t.test, s.test);
  EXPECT_THROW(split(d, 0.0, rng), InvalidArgument);
  EXPECT_THROW(split(d, 1.0, rng), InvalidArgument);
}

TEST(Manifest, ListsFilesAndProvenance) {
  const auto d = merge({make_dataset("RW", 3), make_dataset("GA", 2)});
  const auto doc = manifest_to_json({{"a.jsonl", "eRW", "RW", 3, false, ""}, {"b.jsonl", "eGA", "GA", 2, true, "boom"}}, d);
  EXPECT_EQ(doc.dump().find("a.jsonl") != std::string::npos, true);
  EXPECT_NE(doc.dump().find("boom"), std::string::npos);
}
