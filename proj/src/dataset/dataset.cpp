#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "dsegym/dataset.hpp"
#include "dsegym/error.hpp"

namespace dsegym {

namespace {

const std::vector<std::pair<std::string, std::string>>& agent_labels() {
  static const std::vector<std::pair<std::string, std::string>> labels = {
      {"rw", "RW"}, {"ga", "GA"}, {"aco", "ACO"}, {"bo", "BO"}, {"rl", "RL"}};
  return labels;
}

}  // namespace

std::string agent_label(const std::string& agent_type) {
  for (const auto& [type, label] : agent_labels()) {
    if (type == agent_type || label == agent_type) return label;
  }
  throw InvalidArgument("unknown agent type '" + agent_type + "'");
}

std::string agent_type_from_label(const std::string& label) {
  for (const auto& [type, l] : agent_labels()) {
    if (l == label || type == label) return type;
  }
  throw InvalidArgument("unknown agent label '" + label + "'");
}

MetricMap to_metric_map(const Observation& obs) {
  MetricMap out;
  if (!obs.valid()) return out;
  for (const auto& m : obs.metrics()) out.emplace_back(m.name, m.value);
  return out;
}

void TrajectoryRecord::validate() const {
  if (schema_version != kTrajectorySchemaVersion) throw InvalidArgument("unsupported schema_version");
  if (experiment_id.empty()) throw InvalidArgument("record has no experiment_id");
  if (env_id.empty()) throw InvalidArgument("record has no env_id");
  if (agent_label(agent_type) != agent_type) throw InvalidArgument("agent_type must be one of RW, GA, ACO, BO, RL");
  if (!std::isfinite(reward)) throw InvalidArgument("record reward must be finite");
  for (const auto& [name, value] : observation) {
    if (!std::isfinite(value)) throw InvalidArgument("observation '" + name + "' is not finite");
  }
}

std::optional<double> TrajectoryRecord::metric(std::string_view name) const {
  for (const auto& [n, v] : observation) {
    if (n == name) return v;
  }
  return std::nullopt;
}

std::string record_to_line(const TrajectoryRecord& r) {
  Json obs = Json::object();
  for (const auto& [name, value] : r.observation) obs[name] = value;
  Json doc;
  doc["schema_version"] = r.schema_version;
  doc["experiment_id"] = r.experiment_id;
  doc["env_id"] = r.env_id;
  doc["workload_id"] = r.workload_id;
  doc["agent_type"] = r.agent_type;
  doc["hyperparam_digest"] = r.hyperparam_digest;
  doc["seed"] = r.seed;
  doc["step_index"] = r.step_index;
  doc["design"] = named_to_json(r.design);
  doc["observation"] = std::move(obs);
  doc["reward"] = r.reward;
  doc["wall_time_ms"] = r.wall_time_ms;
  return doc.dump();
}

TrajectoryRecord record_from_line(std::string_view line) {
  TrajectoryRecord r;
  try {
    const auto doc = Json::parse(line);
    r.schema_version = doc.at("schema_version").get<int>();
    r.experiment_id = doc.at("experiment_id").get<std::string>();
    r.env_id = doc.at("env_id").get<std::string>();
    r.workload_id = doc.at("workload_id").get<std::string>();
    r.agent_type = doc.at("agent_type").get<std::string>();
    r.hyperparam_digest = doc.at("hyperparam_digest").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.step_index = doc.at("step_index").get<std::uint64_t>();
    r.design = named_from_json(doc.at("design"));
    for (const auto& [name, value] : doc.at("observation").items()) r.observation.emplace_back(name, value.get<double>());
    r.reward = doc.at("reward").get<double>();
    r.wall_time_ms = doc.at("wall_time_ms").get<std::int64_t>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed trajectory record: ") + e.what());
  }
  r.validate();
  return r;
}

void Dataset::push_back(TrajectoryRecord record) {
  ++provenance_[{record.agent_type, record.experiment_id}];
  records_.push_back(std::move(record));
}

std::map<std::string, std::size_t> Dataset::agent_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& [key, count] : provenance_) out[key.first] += count;
  return out;
}

std::string Dataset::env_id() const { return records_.empty() ? std::string{} : records_.front().env_id; }

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path) : path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (std::filesystem::exists(path_)) {
    std::uintmax_t keep = 0;
    {
      std::ifstream in(path_, std::ios::binary);
      std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const auto nl = content.rfind('\n');
      keep = nl == std::string::npos ? 0 : nl + 1;
    }
    if (keep != std::filesystem::file_size(path_)) std::filesystem::resize_file(path_, keep);
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open trajectory file " + path_.string());
}

void TrajectoryWriter::append(const TrajectoryRecord& record) {
  record.validate();
  out_ << record_to_line(record) << '\n';
  out_.flush();
  if (!out_) throw Error("write failed on trajectory file " + path_.string());
  ++appended_;
}

LoadResult load_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trajectory file " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  LoadResult out;
  std::set<std::pair<std::string, std::uint64_t>> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string_view line(content.data() + pos, (terminated ? nl : content.size()) - pos);
    pos = terminated ? nl + 1 : content.size();
    ++line_no;
    if (line.empty()) continue;
    TrajectoryRecord record;
    try {
      record = record_from_line(line);
    } catch (const InvalidArgument& e) {
      if (!terminated) {
        out.warnings.push_back(path.string() + ": dropped truncated final record at line " + std::to_string(line_no));
        break;
      }
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.emplace(record.experiment_id, record.step_index).second) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": duplicate step " +
                            std::to_string(record.step_index) + " of '" + record.experiment_id + "'");
    }
    out.dataset.push_back(std::move(record));
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string());
  for (const auto& r : dataset.records()) out << record_to_line(r) << '\n';
  out.flush();
  if (!out) throw Error("write failed on " + path.string());
}

void check_step_sequence(const Dataset& dataset) {
  std::map<std::string, std::uint64_t> next;
  for (const auto& r : dataset.records()) {
    auto& expected = next[r.experiment_id];
    if (r.step_index != expected) {
      throw InvalidArgument("step_index " + std::to_string(r.step_index) + " breaks the sequence of '" +
                            r.experiment_id + "' (expected " + std::to_string(expected) + ")");
    }
    ++expected;
  }
}

Dataset merge(const std::vector<Dataset>& datasets) {
  std::string env;
  std::optional<int> schema;
  for (const auto& d : datasets) {
    for (const auto& r : d.records()) {
      if (env.empty()) env = r.env_id;
      if (!schema) schema = r.schema_version;
      if (r.env_id != env) throw InvalidArgument("cannot merge across environments");
      if (r.schema_version != *schema) throw InvalidArgument("cannot merge across schema versions");
    }
  }
  Dataset out;
  for (const auto& d : datasets) {
    for (const auto& r : d.records()) out.push_back(r);
  }
  return out;
}

Dataset sample_mixture(const std::map<std::string, Dataset>& per_agent,
                       const std::map<std::string, double>& proportions, std::size_t size, Rng& rng) {
  if (proportions.empty()) throw InvalidArgument("mixture needs at least one proportion");
  double total = 0.0;
  std::string largest;
  for (const auto& [source, p] : proportions) {
    if (!(p >= 0.0)) throw InvalidArgument("mixture proportion for '" + source + "' is negative");
    total += p;
    if (largest.empty() || p > proportions.at(largest)) largest = source;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mixture proportions must sum to 1");

  std::map<std::string, std::size_t> counts;
  std::size_t assigned = 0;
  for (const auto& [source, p] : proportions) {
    counts[source] = static_cast<std::size_t>(std::llround(p * static_cast<double>(size)));
    assigned += counts[source];
  }
  // Rounding can over- or under-shoot by a few records.
  if (assigned > size) {
    const std::size_t excess = assigned - size;
    if (counts[largest] < excess) throw InvalidArgument("mixture rounding cannot be reconciled");
    counts[largest] -= excess;
  } else {
    counts[largest] += size - assigned;
  }

  Dataset out;
  std::vector<const TrajectoryRecord*> picked;
  picked.reserve(size);
  for (const auto& [source, want] : counts) {
    if (want == 0) continue;
    auto it = per_agent.find(source);
    const std::size_t have = it == per_agent.end() ? 0 : it->second.size();
    if (have < want) {
      throw InvalidArgument("source '" + source + "' has " + std::to_string(have) + " records, mixture needs " +
                            std::to_string(want));
    }
    std::vector<std::size_t> idx(have);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: the first `want` slots become a uniform sample.
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t j = k + rng.below(have - k);
      std::swap(idx[k], idx[j]);
    }
    for (std::size_t k = 0; k < want; ++k) picked.push_back(&it->second[idx[k]]);
  }
  rng.shuffle(std::span<const TrajectoryRecord*>(picked));
  for (const auto* r : picked) out.push_back(*r);
  return out;
}

SplitResult split(const Dataset& dataset, double test_fraction, Rng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must be in (0,1)");
  const std::size_t n = dataset.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(std::span<std::size_t>(idx));
  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < n_test; ++k) in_test[idx[k]] = true;
  SplitResult out;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(dataset[i]);
  return out;
}

Json manifest_to_json(const std::vector<ManifestEntry>& entries, const Dataset& merged) {
  Json files = Json::array();
  for (const auto& e : entries) {
    Json f;
    f["file"] = e.file;
    f["experiment_id"] = e.experiment_id;
    f["agent_type"] = e.agent_type;
    f["records"] = e.records;
    f["partial"] = e.partial;
    if (!e.error.empty()) f["error"] = e.error;
    files.push_back(std::move(f));
  }
  Json prov = Json::array();
  for (const auto& [key, count] : merged.provenance()) {
    prov.push_back({{"agent_type", key.first}, {"experiment_id", key.second}, {"count", count}});
  }
  Json agents = Json::object();
  for (const auto& [agent, count] : merged.agent_counts()) agents[agent] = count;
  Json doc;
  doc["schema_version"] = kTrajectorySchemaVersion;
  doc["env_id"] = merged.env_id();
  doc["records"] = merged.size();
  doc["agents"] = std::move(agents);
  doc["files"] = std::move(files);
  doc["provenance"] = std::move(prov);
  return doc;
}

}  // namespace dsegym
