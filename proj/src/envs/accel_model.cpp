#include <algorithm>

#include "dsegym/envs.hpp"
#include "lookup.hpp"

namespace dsegym {

namespace {

struct Dataflow {
  double utilization = 1.0;
  double weight_reuse_words = 0.0;
  double energy_per_op = 0.0;
  double area = 0.0;
};

// Roofline accelerator: latency is the slower of compute and DRAM traffic,
// where traffic shrinks as the buffer and scratchpads grow. Designs whose
// on-chip storage exceeds the budget are infeasible.
class AccelModel final : public CostModel {
 public:
  explicit AccelModel(const EnvFixture& fixture)
      : id_(fixture.name + "-" + fixture.variant),
        space_(fixture.space()),
        pes_(space_, fixture.doc.at("defaults"), "NumPEs"),
        glb_(space_, fixture.doc.at("defaults"), "GlobalBufferKB"),
        weight_spad_(space_, fixture.doc.at("defaults"), "WeightSPadWords"),
        input_spad_(space_, fixture.doc.at("defaults"), "InputSPadWords"),
        accum_spad_(space_, fixture.doc.at("defaults"), "AccumSPadWords"),
        clock_mhz_(space_, fixture.doc.at("defaults"), "ClockMHz"),
        bandwidth_gbs_(space_, fixture.doc.at("defaults"), "DramBandwidthGBs"),
        dataflow_(space_, fixture.doc.at("defaults"), "Dataflow", [&](const std::string& label) {
          const auto& e = detail::lookup_label(fixture.doc.at("model").at("dataflow"), "dataflow", label);
          return Dataflow{e.at("utilization"), e.at("weight_reuse_words"), e.at("energy_per_op"), e.at("area")};
        }) {
    const auto& m = fixture.doc.at("model");
    ops_per_cycle_ = m.at("ops_per_pe_cycle");
    word_bytes_ = m.at("word_bytes");
    budget_kb_ = m.at("on_chip_budget_kb");
    dram_energy_per_byte_ = m.at("dram_energy_per_byte");
    leakage_ = m.at("leakage_w_per_mm2");
    area_base_ = m.at("area").at("base");
    area_per_pe_ = m.at("area").at("per_pe");
    area_per_glb_kb_ = m.at("area").at("per_glb_kb");
    area_per_spad_word_ = m.at("area").at("per_spad_word");
    input_reuse_ = m.at("spad_reuse").at("input_words");
    accum_reuse_ = m.at("spad_reuse").at("accum_words");
  }

  const std::string& id() const override { return id_; }
  const ParameterSpace& space() const override { return space_; }
  std::vector<std::string> metric_names() const override { return {"latency", "energy", "area"}; }

  Observation evaluate(const DesignPoint& point, const WorkloadSpec& workload) const override {
    space_.validate(point);
    const double pes = pes_(point);
    const double glb = glb_(point);
    const double w = weight_spad_(point);
    const double in = input_spad_(point);
    const double acc = accum_spad_(point);
    const auto& df = dataflow_(point);
    const double clock = clock_mhz_(point) * 1e6;
    const double bandwidth = bandwidth_gbs_(point) * 1e9;

    const double buffer_bytes = glb * 1024.0 + pes * (w + in + acc) * word_bytes_;
    if (buffer_bytes > budget_kb_ * 1024.0) return Observation::infeasible();

    const double flops = workload.trait("flops");
    const double compute = flops / (pes * ops_per_cycle_ * df.utilization * clock);
    const double traffic = workload.trait("bytes") * (1.0 + workload.trait("working_set_kb") / glb) *
                           (1.0 + df.weight_reuse_words / w) * (1.0 + input_reuse_ / in) * (1.0 + accum_reuse_ / acc);
    const double latency = std::max(compute, traffic / bandwidth);
    const double area = area_base_ + area_per_pe_ * pes + area_per_glb_kb_ * glb +
                        area_per_spad_word_ * (w + in + acc) * pes + df.area;
    const double energy = flops * df.energy_per_op + traffic * dram_energy_per_byte_ + leakage_ * area * latency;

    Observation obs;
    obs.set("latency", latency, Unit::kSeconds).set("energy", energy, Unit::kJoules).set("area", area,
                                                                                         Unit::kSquareMm);
    return obs;
  }

 private:
  std::string id_;
  ParameterSpace space_;
  detail::NumericLookup pes_;
  detail::NumericLookup glb_;
  detail::NumericLookup weight_spad_;
  detail::NumericLookup input_spad_;
  detail::NumericLookup accum_spad_;
  detail::NumericLookup clock_mhz_;
  detail::NumericLookup bandwidth_gbs_;
  detail::CategoricalLookup<Dataflow> dataflow_;
  double ops_per_cycle_ = 0;
  double word_bytes_ = 0;
  double budget_kb_ = 0;
  double dram_energy_per_byte_ = 0;
  double leakage_ = 0;
  double area_base_ = 0;
  double area_per_pe_ = 0;
  double area_per_glb_kb_ = 0;
  double area_per_spad_word_ = 0;
  double input_reuse_ = 0;
  double accum_reuse_ = 0;
};

}  // namespace

std::unique_ptr<CostModel> make_accel_model(const EnvFixture& fixture) {
  return std::make_unique<AccelModel>(fixture);
}

}  // namespace dsegym
