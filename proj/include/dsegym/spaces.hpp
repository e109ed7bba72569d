#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dsegym/json_io.hpp"
#include "dsegym/rng.hpp"

namespace dsegym {

using BigCount = boost::multiprecision::cpp_int;

struct CategoricalDomain {
  std::vector<std::string> values;
};

// Finite stepped grid min, min+step, ..., never continuous.
struct NumericDomain {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
};

class ParameterSpec {
 public:
  static ParameterSpec categorical(std::string name, std::vector<std::string> values);
  static ParameterSpec numeric(std::string name, double min, double max, double step);

  const std::string& name() const noexcept { return name_; }
  bool is_categorical() const noexcept { return std::holds_alternative<CategoricalDomain>(domain_); }
  const CategoricalDomain& categorical_domain() const { return std::get<CategoricalDomain>(domain_); }
  const NumericDomain& numeric_domain() const { return std::get<NumericDomain>(domain_); }

  // Number of admissible values (labels, or grid points).
  std::size_t size() const noexcept { return size_; }

  // Value at grid/label index `k`.
  double numeric_value(std::size_t k) const;
  const std::string& label(std::size_t k) const;

  std::optional<std::size_t> index_of_label(std::string_view label) const;
  // Grid index whose value equals `v` (within 1e-9 of a step), if any.
  std::optional<std::size_t> index_of_value(double v) const;

 private:
  ParameterSpec(std::string name, std::variant<CategoricalDomain, NumericDomain> domain, std::size_t size)
      : name_(std::move(name)), domain_(std::move(domain)), size_(size) {}

  std::string name_;
  std::variant<CategoricalDomain, NumericDomain> domain_;
  std::size_t size_;
};

// One concrete assignment. Each entry is the label index (categorical) or the
// grid index k (numeric, value = min + k*step), aligned with the space order.
struct DesignPoint {
  std::vector<std::uint32_t> index;

  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
  friend auto operator<=>(const DesignPoint&, const DesignPoint&) = default;
};

struct DesignPointHash {
  std::size_t operator()(const DesignPoint& p) const noexcept;
};

using ParamValue = std::variant<std::string, double>;
using NamedDesign = std::vector<std::pair<std::string, ParamValue>>;

class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterSpec> parameters);

  std::size_t size() const noexcept { return parameters_.size(); }
  const ParameterSpec& operator[](std::size_t i) const { return parameters_[i]; }
  const std::vector<ParameterSpec>& parameters() const noexcept { return parameters_; }
  std::optional<std::size_t> find(std::string_view name) const;

  bool contains(const DesignPoint& point) const noexcept;
  // Throws InvalidArgument describing the first violated invariant.
  void validate(const DesignPoint& point) const;

  // Σ|values| over categorical + one slot per numeric parameter.
  std::size_t encoded_dimension() const noexcept;

  // Mixed-radix rank of a point (last parameter varies fastest). Only valid
  // when the cardinality fits in 64 bits.
  std::uint64_t rank(const DesignPoint& point) const;
  DesignPoint unrank(std::uint64_t rank) const;

  ParamValue value(const DesignPoint& point, std::size_t i) const;
  NamedDesign named(const DesignPoint& point) const;
  // Inverse of named(); entries may come in any order but must cover every parameter.
  DesignPoint from_named(const NamedDesign& design) const;

  friend bool operator==(const ParameterSpace& a, const ParameterSpace& b);

 private:
  std::vector<ParameterSpec> parameters_;
};

// Product of per-parameter domain sizes, exact.
BigCount cardinality(const ParameterSpace& space);
// Cardinality if it fits in 64 bits.
std::optional<std::uint64_t> cardinality_u64(const ParameterSpace& space);

DesignPoint sample_uniform(const ParameterSpace& space, Rng& rng);

// Every point exactly once, lexicographic in parameter order.
std::vector<DesignPoint> enumerate(const ParameterSpace& space, std::uint64_t limit);

std::vector<double> encode(const ParameterSpace& space, const DesignPoint& point);
void encode_into(const ParameterSpace& space, const DesignPoint& point, std::span<double> out);
DesignPoint decode(const ParameterSpace& space, std::span<const double> features);

// Copy of `point` with parameter `position` redrawn uniformly from its domain
// minus the current value (unchanged when the domain has one value).
DesignPoint resample_parameter(const ParameterSpace& space, const DesignPoint& point,
                               std::size_t position, Rng& rng);
// resample_parameter at a uniformly chosen position.
DesignPoint neighbor(const ParameterSpace& space, const DesignPoint& point, Rng& rng);

ParameterSpace space_from_json(const Json& doc);
Json space_to_json(const ParameterSpace& space);
ParameterSpace load_space_file(const std::filesystem::path& path);

Json named_to_json(const NamedDesign& design);
NamedDesign named_from_json(const Json& obj);
std::string to_string(const ParamValue& value);

}  // namespace dsegym
