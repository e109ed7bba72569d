#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dsegym/core.hpp"
#include "dsegym/json_io.hpp"
#include "dsegym/rng.hpp"
#include "dsegym/spaces.hpp"

namespace dsegym {

inline constexpr int kTrajectorySchemaVersion = 1;

using MetricMap = std::vector<std::pair<std::string, double>>;

// One agent <-> environment exchange. An empty observation marks an
// infeasible design.
struct TrajectoryRecord {
  int schema_version = kTrajectorySchemaVersion;
  std::string experiment_id;
  std::string env_id;
  std::string workload_id;
  std::string agent_type;  // RW, GA, ACO, BO or RL
  std::string hyperparam_digest;
  std::uint64_t seed = 0;
  std::uint64_t step_index = 0;
  NamedDesign design;
  MetricMap observation;
  double reward = 0.0;
  std::int64_t wall_time_ms = 0;

  void validate() const;
  std::optional<double> metric(std::string_view name) const;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

// "rw" -> "RW" and back.
std::string agent_label(const std::string& agent_type);
std::string agent_type_from_label(const std::string& label);

MetricMap to_metric_map(const Observation& obs);

// Fixed field order; reals use shortest round-trip decimal form.
std::string record_to_line(const TrajectoryRecord& record);
TrajectoryRecord record_from_line(std::string_view line);

class Dataset {
 public:
  using ProvenanceKey = std::pair<std::string, std::string>;  // (agent_type, experiment_id)

  void push_back(TrajectoryRecord record);
  const std::vector<TrajectoryRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const TrajectoryRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::map<ProvenanceKey, std::size_t>& provenance() const noexcept { return provenance_; }
  // Record counts per agent type.
  std::map<std::string, std::size_t> agent_counts() const;
  // Env id shared by the records; empty for an empty dataset.
  std::string env_id() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<TrajectoryRecord> records_;
  std::map<ProvenanceKey, std::size_t> provenance_;
};

// Appends one record per line to {experiment_id}.jsonl style files. Opening
// an existing file first drops any partial trailing line. Each append is
// flushed before returning and I/O errors throw.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);
  void append(const TrajectoryRecord& record);
  const std::filesystem::path& path() const noexcept { return path_; }
  std::size_t appended() const noexcept { return appended_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t appended_ = 0;
};

struct LoadResult {
  Dataset dataset;
  std::vector<std::string> warnings;
};

// A malformed final line without a terminating newline is dropped with a
// warning; any other malformed line or a repeated (experiment_id,
// step_index) throws.
LoadResult load_trajectory_file(const std::filesystem::path& path);
// Throws unless every experiment's steps run 0, 1, 2, ... in file order.
void check_step_sequence(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Concatenation in argument order. Throws on mixed env ids or schema versions.
Dataset merge(const std::vector<Dataset>& datasets);

// round(p * size) records drawn without replacement from each source, the
// rounding residue going to the largest proportion, then shuffled.
Dataset sample_mixture(const std::map<std::string, Dataset>& per_agent,
                       const std::map<std::string, double>& proportions, std::size_t size, Rng& rng);

struct SplitResult {
  Dataset train;
  Dataset test;
};
// round(test_fraction * n) records go to test; both halves keep input order.
SplitResult split(const Dataset& dataset, double test_fraction, Rng& rng);

struct ManifestEntry {
  std::string file;
  std::string experiment_id;
  std::string agent_type;
  std::size_t records = 0;
  bool partial = false;
  std::string error;
};

Json manifest_to_json(const std::vector<ManifestEntry>& entries, const Dataset& merged);

}  // namespace dsegym
