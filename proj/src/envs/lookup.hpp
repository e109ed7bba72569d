#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsegym/error.hpp"
#include "dsegym/json_io.hpp"
#include "dsegym/spaces.hpp"

namespace dsegym::detail {

// Per-index table for one categorical knob. Knobs missing from the space
// take the fixture default, so small and full variants share one model.
template <class T>
class CategoricalLookup {
 public:
  CategoricalLookup(const ParameterSpace& space, const Json& defaults, const std::string& name,
                    const std::function<T(const std::string&)>& make) {
    pos_ = space.find(name);
    if (pos_) {
      const auto& spec = space[*pos_];
      if (!spec.is_categorical()) throw InvalidArgument("parameter '" + name + "' must be categorical");
      for (const auto& label : spec.categorical_domain().values) values_.push_back(make(label));
    } else {
      if (!defaults.contains(name)) throw InvalidArgument("no default for absent parameter '" + name + "'");
      values_.push_back(make(defaults.at(name).get<std::string>()));
    }
  }

  const T& operator()(const DesignPoint& p) const { return values_[pos_ ? p.index[*pos_] : 0]; }

 private:
  std::optional<std::size_t> pos_;
  std::vector<T> values_;
};

class NumericLookup {
 public:
  NumericLookup(const ParameterSpace& space, const Json& defaults, const std::string& name) {
    pos_ = space.find(name);
    if (pos_) {
      const auto& spec = space[*pos_];
      if (spec.is_categorical()) throw InvalidArgument("parameter '" + name + "' must be numeric");
      for (std::size_t k = 0; k < spec.size(); ++k) values_.push_back(spec.numeric_value(k));
    } else {
      if (!defaults.contains(name)) throw InvalidArgument("no default for absent parameter '" + name + "'");
      values_.push_back(defaults.at(name).get<double>());
    }
  }

  double operator()(const DesignPoint& p) const { return values_[pos_ ? p.index[*pos_] : 0]; }

 private:
  std::optional<std::size_t> pos_;
  std::vector<double> values_;
};

inline const Json& lookup_label(const Json& table, const std::string& table_name, const std::string& label) {
  if (!table.contains(label)) throw InvalidArgument(table_name + " has no entry for '" + label + "'");
  return table.at(label);
}

}  // namespace dsegym::detail
