#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "dsegym/error.hpp"
#include "dsegym/orchestrator.hpp"

namespace dsegym {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Quotes a CSV field only when it needs it.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string quartiles_csv(const SweepSummary& s) {
  std::string out = "agent,agent_type,objective,budget,configs,min,q1,median,q3,max,iqr,best_digest,best_reward\n";
  for (const auto& g : s.grids) {
    out += field(g.grid) + "," + g.agent_type + "," + field(s.objective) + "," + std::to_string(g.budget) + "," +
           std::to_string(g.configs) + "," + num(g.spread.min) + "," + num(g.spread.q1) + "," +
           num(g.spread.median) + "," + num(g.spread.q3) + "," + num(g.spread.max) + "," + num(g.spread.iqr()) +
           "," + g.best_digest + "," + num(g.best_reward) + "\n";
  }
  return out;
}

std::string normalized_csv(const SweepSummary& s) {
  const auto table = mean_normalized_reward(s.trials, s.trial_grids);
  std::set<std::uint64_t> budgets;
  std::vector<std::string> agents;
  std::map<std::pair<std::string, std::uint64_t>, double> cell;
  for (const auto& r : table.rows) {
    budgets.insert(r.budget);
    if (agents.empty() || agents.back() != r.agent) agents.push_back(r.agent);
    cell[{r.agent, r.budget}] = r.mean;
  }
  std::string out = "agent";
  for (auto b : budgets) out += ",budget_" + std::to_string(b);
  out += "\n";
  for (const auto& a : agents) {
    out += field(a);
    for (auto b : budgets) {
      const auto it = cell.find({a, b});
      out += ",";
      if (it != cell.end()) out += num(it->second);
    }
    out += "\n";
  }
  return out;
}

std::string time_csv(const SweepSummary& s) {
  struct Acc {
    double seconds = 0.0;
    double samples = 0.0;
    std::size_t trials = 0;
  };
  std::map<std::pair<std::string, std::uint64_t>, Acc> acc;
  std::vector<std::pair<std::string, std::uint64_t>> order;
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    const auto k = std::make_pair(s.trial_grids[i], s.trials[i].sample_budget);
    auto [it, inserted] = acc.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.seconds += s.trials[i].wall_seconds;
    it->second.samples += static_cast<double>(s.trials[i].samples_used);
    ++it->second.trials;
  }
  std::string out = "agent,budget,trials,mean_wall_seconds,mean_samples_used\n";
  for (const auto& k : order) {
    const auto& a = acc.at(k);
    const auto n = static_cast<double>(a.trials);
    out += field(k.first) + "," + std::to_string(k.second) + "," + std::to_string(a.trials) + "," +
           num(a.seconds / n) + "," + num(a.samples / n) + "\n";
  }
  return out;
}

std::string trials_csv(const SweepSummary& s) {
  std::string out =
      "experiment_id,agent,agent_type,hyperparam_digest,budget,seed,samples_used,best_reward,exhausted,status,"
      "wall_seconds,error\n";
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    const auto& t = s.trials[i];
    out += field(t.experiment_id) + "," + field(s.trial_grids[i]) + "," + t.agent_type + "," + t.hyperparam_digest +
           "," + std::to_string(t.sample_budget) + "," + std::to_string(t.seed) + "," +
           std::to_string(t.samples_used) + "," + (t.best ? num(t.best->reward) : std::string{}) + "," +
           (t.exhausted ? "true" : "false") + "," + (t.failed ? "partial" : "complete") + "," +
           num(t.wall_seconds) + "," + field(t.error) + "\n";
  }
  return out;
}

}  // namespace

Json sweep_to_json(const SweepSummary& summary) {
  Json trials = Json::array();
  for (std::size_t i = 0; i < summary.trials.size(); ++i) {
    Json t = summary.trials[i].to_json();
    t["grid"] = summary.trial_grids[i];
    trials.push_back(std::move(t));
  }
  Json doc;
  doc["trials"] = std::move(trials);
  return doc;
}

SweepSummary sweep_from_json(const Json& doc) {
  std::vector<TrialResult> trials;
  std::vector<std::string> grids;
  try {
    for (const auto& t : doc.at("trials")) {
      trials.push_back(TrialResult::from_json(t));
      grids.push_back(t.value("grid", trials.back().agent_type));
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed sweep summary: ") + e.what());
  }
  return summarize(std::move(trials), std::move(grids));
}

std::vector<std::filesystem::path> write_report(const SweepSummary& summary, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"quartiles.csv", quartiles_csv(summary)},
      {"normalized_reward.csv", normalized_csv(summary)},
      {"time_to_completion.csv", time_csv(summary)},
      {"trials.csv", trials_csv(summary)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : files) {
    written.push_back(out_dir / name);
    write_text(written.back(), text);
  }
  return written;
}

}  // namespace dsegym
