#include "dsegym/envs.hpp"

namespace dsegym {

namespace {

const Json& find_workload(const Json& doc, const std::string& id) {
  for (const auto& w : doc.at("workloads")) {
    if (w.at("id").get<std::string>() == id) return w;
  }
  throw InvalidArgument("unknown workload '" + id + "'");
}

}  // namespace

std::pair<std::string, std::string> parse_env_id(const std::string& env_id) {
  const auto dash = env_id.find('-');
  std::string name = env_id.substr(0, dash);
  std::string variant = dash == std::string::npos ? "full" : env_id.substr(dash + 1);
  if (name.empty() || variant.empty()) throw InvalidArgument("malformed env id '" + env_id + "'");
  return {std::move(name), std::move(variant)};
}

EnvFixture EnvFixture::load(const std::string& env_id) {
  auto [name, variant] = parse_env_id(env_id);
  const auto path = data_dir() / "envs" / (name + ".json");
  if (!std::filesystem::exists(path)) throw InvalidArgument("unknown environment '" + env_id + "'");
  return from_json(std::move(name), std::move(variant), read_json_file(path));
}

EnvFixture EnvFixture::from_json(std::string name, std::string variant, Json doc) {
  for (const char* key : {"spaces", "defaults", "model", "workloads"}) {
    if (!doc.contains(key)) throw InvalidArgument("fixture '" + name + "' lacks '" + key + "'");
  }
  if (!doc.at("spaces").contains(variant)) {
    throw InvalidArgument("fixture '" + name + "' has no '" + variant + "' space");
  }
  return EnvFixture{std::move(name), std::move(variant), std::move(doc)};
}

ParameterSpace EnvFixture::space() const { return space_from_json(doc.at("spaces").at(variant)); }

std::vector<std::string> EnvFixture::workload_ids() const {
  std::vector<std::string> ids;
  for (const auto& w : doc.at("workloads")) ids.push_back(w.at("id"));
  return ids;
}

WorkloadSpec EnvFixture::workload(const std::string& id) const {
  const auto& w = find_workload(doc, id);
  WorkloadSpec spec{id, {}};
  for (const auto& [key, value] : w.at("traits").items()) spec.traits.emplace(key, value.get<double>());
  spec.validate();
  return spec;
}

std::vector<std::string> EnvFixture::objective_names(const std::string& workload_id) const {
  std::vector<std::string> names;
  for (const auto& [key, value] : find_workload(doc, workload_id).at("objectives").items()) names.push_back(key);
  return names;
}

RewardSpec EnvFixture::objective(const std::string& workload_id, const std::string& objective) const {
  const auto& objectives = find_workload(doc, workload_id).at("objectives");
  if (!objectives.contains(objective)) {
    throw InvalidArgument("workload '" + workload_id + "' has no objective '" + objective + "'");
  }
  return reward_spec_from_json(objectives.at(objective));
}

NamedDesign EnvFixture::reference_design() const {
  // Restricted to the parameters of the chosen variant.
  const auto sp = space();
  NamedDesign out;
  for (const auto& [key, value] : named_from_json(doc.at("reference_design"))) {
    if (sp.find(key)) out.emplace_back(key, value);
  }
  return out;
}

std::unique_ptr<CostModel> make_cost_model(const EnvFixture& fixture) {
  if (fixture.name == "dram") return make_dram_model(fixture);
  if (fixture.name == "accel") return make_accel_model(fixture);
  if (fixture.name == "soc") return make_soc_model(fixture);
  throw InvalidArgument("no cost model named '" + fixture.name + "'");
}

}  // namespace dsegym
