#include <algorithm>
#include <map>
#include <optional>

#include "dsegym/envs.hpp"
#include "lookup.hpp"

namespace dsegym {

namespace {

constexpr int kMaxSlots = 8;

struct PeType {
  bool present = false;
  double power = 0.0;
  double area = 0.0;
  std::map<std::string, double> rates;
};

struct Task {
  double work = 0.0;
  double out_bytes = 0.0;
  std::string kind;
  std::vector<std::size_t> deps;
};

std::vector<Task> parse_tasks(const Json& workload) {
  std::vector<Task> tasks;
  std::map<std::string, std::size_t, std::less<>> by_name;
  for (const auto& t : workload.at("tasks")) {
    Task task{t.at("work"), t.at("out_bytes"), t.at("kind"), {}};
    for (const auto& dep : t.at("deps")) {
      auto it = by_name.find(dep.get<std::string>());
      if (it == by_name.end()) throw InvalidArgument("task dependency '" + dep.get<std::string>() + "' not defined earlier");
      task.deps.push_back(it->second);
    }
    by_name.emplace(t.at("name").get<std::string>(), tasks.size());
    tasks.push_back(std::move(task));
  }
  if (tasks.empty()) throw InvalidArgument("workload '" + workload.at("id").get<std::string>() + "' has no tasks");
  return tasks;
}

// Heterogeneous SoC: PE slots (or None) joined by a NoC. The workload's task
// graph is list-scheduled in fixture order; each task goes to the PE that
// finishes it earliest, with transfers between PEs paid over the NoC link.
class SocModel final : public CostModel {
 public:
  explicit SocModel(const EnvFixture& fixture)
      : id_(fixture.name + "-" + fixture.variant),
        space_(fixture.space()),
        width_(space_, fixture.doc.at("defaults"), "NocBusWidth") {
    const auto& m = fixture.doc.at("model");
    for (int k = 0; k < kMaxSlots; ++k) {
      const std::string name = "PE" + std::to_string(k);
      const Json& defaults = fixture.doc.at("defaults");
      if (!space_.find(name) && !defaults.contains(name)) continue;
      slots_.emplace_back(space_, defaults, name, [&m](const std::string& label) {
        PeType pe;
        if (label == "None") return pe;
        const auto& e = detail::lookup_label(m.at("pe_types"), "pe_types", label);
        pe.present = true;
        pe.power = e.at("power");
        pe.area = e.at("area");
        pe.rates = e.at("rates").get<std::map<std::string, double>>();
        return pe;
      });
    }
    noc_clock_hz_ = m.at("noc_clock_hz");
    noc_power_per_bit_ = m.at("noc_power_per_bit");
    noc_area_per_bit_ = m.at("noc_area_per_bit");
    base_power_ = m.at("base_power");
    base_area_ = m.at("base_area");
    for (const auto& w : fixture.doc.at("workloads")) tasks_.emplace(w.at("id").get<std::string>(), parse_tasks(w));
  }

  const std::string& id() const override { return id_; }
  const ParameterSpace& space() const override { return space_; }
  std::vector<std::string> metric_names() const override { return {"power", "performance", "area"}; }

  Observation evaluate(const DesignPoint& point, const WorkloadSpec& workload) const override {
    space_.validate(point);
    auto it = tasks_.find(workload.id);
    if (it == tasks_.end()) throw InvalidArgument("soc has no task graph for workload '" + workload.id + "'");
    const auto& tasks = it->second;

    std::vector<const PeType*> pes;
    for (const auto& slot : slots_) {
      if (const auto& pe = slot(point); pe.present) pes.push_back(&pe);
    }
    if (pes.empty()) return Observation::infeasible();

    const double width = width_(point);
    const double link_bytes_per_s = width / 8.0 * noc_clock_hz_;
    std::vector<double> free_at(pes.size(), 0.0);
    std::vector<double> finish(tasks.size(), 0.0);
    std::vector<std::size_t> placed(tasks.size(), 0);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const auto& task = tasks[t];
      std::optional<std::pair<double, std::size_t>> best;
      for (std::size_t p = 0; p < pes.size(); ++p) {
        double ready = 0.0;
        for (auto dep : task.deps) {
          double arrive = finish[dep];
          if (placed[dep] != p) arrive += tasks[dep].out_bytes / link_bytes_per_s;
          ready = std::max(ready, arrive);
        }
        const double start = std::max(ready, free_at[p]);
        const double fin = start + task.work / rate(*pes[p], task.kind);
        if (!best || fin < best->first) best = {fin, p};
      }
      finish[t] = best->first;
      placed[t] = best->second;
      free_at[best->second] = best->first;
    }
    const double makespan = *std::max_element(finish.begin(), finish.end());

    double power = base_power_;
    for (const auto* pe : pes) power += pe->power;
    double area = base_area_;
    for (const auto* pe : pes) area += pe->area;
    power += noc_power_per_bit_ * width;
    area += noc_area_per_bit_ * width;

    Observation obs;
    obs.set("power", power, Unit::kWatts).set("performance", makespan, Unit::kSeconds).set("area", area,
                                                                                           Unit::kSquareMm);
    return obs;
  }

 private:
  static double rate(const PeType& pe, const std::string& kind) {
    auto it = pe.rates.find(kind);
    if (it == pe.rates.end()) throw InvalidArgument("PE type has no rate for task kind '" + kind + "'");
    return it->second;
  }

  std::string id_;
  ParameterSpace space_;
  detail::NumericLookup width_;
  std::vector<detail::CategoricalLookup<PeType>> slots_;
  std::map<std::string, std::vector<Task>> tasks_;
  double noc_clock_hz_ = 0;
  double noc_power_per_bit_ = 0;
  double noc_area_per_bit_ = 0;
  double base_power_ = 0;
  double base_area_ = 0;
};

}  // namespace

std::unique_ptr<CostModel> make_soc_model(const EnvFixture& fixture) { return std::make_unique<SocModel>(fixture); }

}  // namespace dsegym
