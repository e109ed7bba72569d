#include <array>

#include "dsegym/envs.hpp"
#include "lookup.hpp"

namespace dsegym {

namespace {

struct CategoricalFactor {
  double latency = 1.0;
  double power = 1.0;
  double locality_sensitivity = 0.0;
  double read_sensitivity = 0.0;
};

struct SchedulerTraits {
  CategoricalFactor factor;
  double queue_weight = 0.0;
};

struct BufferTraits {
  CategoricalFactor factor;
  double share = 1.0;
};

CategoricalFactor parse_factor(const Json& e) {
  return {e.at("latency").get<double>(), e.at("power").get<double>(), e.value("locality_sensitivity", 0.0),
          e.value("read_sensitivity", 0.0)};
}

// Memory-controller model. Latency and power are the workload's base values
// scaled by one factor per categorical knob and a response per numeric knob:
//   buffer   1 + q(sched) / (n * share(sbuf)) + lookup * n   (U-shaped, interacts)
//   refresh  1 + stall / (postponed + pulledin)
//   active   1 + q / m + overhead * m
// Power grows linearly in every buffer depth. energy = latency * power.
class DramModel final : public CostModel {
 public:
  explicit DramModel(const EnvFixture& fixture)
      : id_(fixture.name + "-" + fixture.variant),
        space_(fixture.space()),
        page_(space_, fixture.doc.at("defaults"), "PagePolicy", factor_for(fixture, "PagePolicy")),
        resp_(space_, fixture.doc.at("defaults"), "RespQueue", factor_for(fixture, "RespQueue")),
        arbiter_(space_, fixture.doc.at("defaults"), "Arbiter", factor_for(fixture, "Arbiter")),
        scheduler_(space_, fixture.doc.at("defaults"), "Scheduler",
                   [&](const std::string& label) {
                     const auto& m = fixture.doc.at("model");
                     return SchedulerTraits{
                         parse_factor(detail::lookup_label(m.at("categorical").at("Scheduler"), "Scheduler", label)),
                         detail::lookup_label(m.at("request_buffer").at("queue_weight"), "queue_weight", label)
                             .get<double>()};
                   }),
        sched_buffer_(space_, fixture.doc.at("defaults"), "SchedulerBuffer",
                      [&](const std::string& label) {
                        const auto& m = fixture.doc.at("model");
                        return BufferTraits{
                            parse_factor(detail::lookup_label(m.at("categorical").at("SchedulerBuffer"),
                                                              "SchedulerBuffer", label)),
                            detail::lookup_label(m.at("request_buffer").at("buffer_share"), "buffer_share", label)
                                .get<double>()};
                      }),
        request_buffer_(space_, fixture.doc.at("defaults"), "RequestBufferSize"),
        postponed_(space_, fixture.doc.at("defaults"), "RefreshMaxPostponed"),
        pulledin_(space_, fixture.doc.at("defaults"), "RefreshMaxPulledin"),
        max_active_(space_, fixture.doc.at("defaults"), "MaxActiveTransactions") {
    const auto& m = fixture.doc.at("model");
    lookup_weight_ = m.at("request_buffer").at("lookup_weight");
    power_per_entry_ = m.at("request_buffer").at("power_per_entry");
    stall_weight_ = m.at("refresh").at("stall_weight");
    power_per_slot_ = m.at("refresh").at("power_per_slot");
    active_queue_weight_ = m.at("max_active").at("queue_weight");
    active_overhead_ = m.at("max_active").at("overhead");
    power_per_transaction_ = m.at("max_active").at("power_per_transaction");
  }

  const std::string& id() const override { return id_; }
  const ParameterSpace& space() const override { return space_; }
  std::vector<std::string> metric_names() const override { return {"latency", "power", "energy"}; }

  Observation evaluate(const DesignPoint& point, const WorkloadSpec& workload) const override {
    space_.validate(point);
    const double locality = workload.trait("locality_fraction");
    const double reads = workload.trait("read_fraction");
    double latency = workload.trait("base_latency_s");
    double power = workload.trait("base_power_w");

    const auto& sched = scheduler_(point);
    const auto& sbuf = sched_buffer_(point);
    const std::array<const CategoricalFactor*, 5> factors = {&page_(point), &sched.factor, &sbuf.factor,
                                                             &resp_(point), &arbiter_(point)};
    for (const auto* f : factors) {
      latency *= f->latency * (1.0 + f->locality_sensitivity * (0.5 - locality)) *
                 (1.0 + f->read_sensitivity * (0.5 - reads));
      power *= f->power;
    }

    const double entries = request_buffer_(point);
    latency *= 1.0 + sched.queue_weight / (entries * sbuf.share) + lookup_weight_ * entries;
    power *= 1.0 + power_per_entry_ * entries;

    const double slots = postponed_(point) + pulledin_(point);
    latency *= 1.0 + stall_weight_ / slots;
    power *= 1.0 + power_per_slot_ * slots;

    const double active = max_active_(point);
    latency *= 1.0 + active_queue_weight_ / active + active_overhead_ * active;
    power *= 1.0 + power_per_transaction_ * active;

    Observation obs;
    obs.set("latency", latency, Unit::kSeconds).set("power", power, Unit::kWatts).set("energy", latency * power,
                                                                                       Unit::kJoules);
    return obs;
  }

 private:
  static std::function<CategoricalFactor(const std::string&)> factor_for(const EnvFixture& fixture,
                                                                         const std::string& knob) {
    const Json& table = fixture.doc.at("model").at("categorical").at(knob);
    return [&table, knob](const std::string& label) { return parse_factor(detail::lookup_label(table, knob, label)); };
  }

  std::string id_;
  ParameterSpace space_;
  detail::CategoricalLookup<CategoricalFactor> page_;
  detail::CategoricalLookup<CategoricalFactor> resp_;
  detail::CategoricalLookup<CategoricalFactor> arbiter_;
  detail::CategoricalLookup<SchedulerTraits> scheduler_;
  detail::CategoricalLookup<BufferTraits> sched_buffer_;
  detail::NumericLookup request_buffer_;
  detail::NumericLookup postponed_;
  detail::NumericLookup pulledin_;
  detail::NumericLookup max_active_;
  double lookup_weight_ = 0;
  double power_per_entry_ = 0;
  double stall_weight_ = 0;
  double power_per_slot_ = 0;
  double active_queue_weight_ = 0;
  double active_overhead_ = 0;
  double power_per_transaction_ = 0;
};

}  // namespace

std::unique_ptr<CostModel> make_dram_model(const EnvFixture& fixture) { return std::make_unique<DramModel>(fixture); }

}  // namespace dsegym
