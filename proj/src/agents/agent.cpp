#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>

#include "dsegym/agent.hpp"
#include "dsegym/error.hpp"

namespace dsegym {

HyperparamSet::HyperparamSet(std::initializer_list<std::pair<const std::string, double>> values) {
  for (const auto& [k, v] : values) set(k, v);
}

HyperparamSet& HyperparamSet::set(const std::string& name, double value) {
  if (name.empty()) throw InvalidArgument("hyperparameter name is empty");
  if (!std::isfinite(value)) throw InvalidArgument("hyperparameter '" + name + "' is not finite");
  values_[name] = value;
  return *this;
}

double HyperparamSet::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw InvalidArgument("missing hyperparameter '" + name + "'");
  return it->second;
}

double HyperparamSet::get_or(const std::string& name, double fallback) const {
  auto it = values_.find(name);
  return it == values_.end() ? fallback : it->second;
}

Json HyperparamSet::to_json() const {
  Json doc = Json::object();
  for (const auto& [k, v] : values_) doc[k] = v;
  return doc;
}

HyperparamSet HyperparamSet::from_json(const Json& doc) {
  if (!doc.is_object()) throw InvalidArgument("hyperparameters must be an object");
  HyperparamSet out;
  for (const auto& [k, v] : doc.items()) {
    if (v.is_boolean()) {
      out.set(k, v.get<bool>() ? 1.0 : 0.0);
    } else if (v.is_number()) {
      out.set(k, v.get<double>());
    } else {
      throw InvalidArgument("hyperparameter '" + k + "' must be a number or boolean");
    }
  }
  return out;
}

std::string HyperparamSet::digest() const {
  const std::string canonical = to_json().dump();
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

Agent::Agent(AgentContext context, HyperparamSet hyperparams)
    : context_(std::move(context)), hyperparams_(std::move(hyperparams)) {
  if (context_.space.size() == 0) throw InvalidArgument("agent needs a non-empty parameter space");
}

void Agent::observe(const DesignPoint& point, double reward) {
  if (!std::isfinite(reward)) throw InvalidArgument("reward must be finite");
  context_.space.validate(point);
  if (!best_ || reward > best_->reward) best_ = BestSoFar{point, reward};
  on_observe(point, reward);
}

}  // namespace dsegym
