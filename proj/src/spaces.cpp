#include "dsegym/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dsegym/error.hpp"

namespace dsegym {

namespace {

// Grid counts tolerate representation error in (max-min)/step, so
// (0.1, 1.0, 0.1) has 10 points rather than 9.
constexpr double kGridTolerance = 1e-9;

std::size_t grid_count(double min, double max, double step) {
  return static_cast<std::size_t>(std::floor((max - min) / step + kGridTolerance)) + 1;
}

}  // namespace

ParameterSpec ParameterSpec::categorical(std::string name, std::vector<std::string> values) {
  if (name.empty()) throw InvalidArgument("parameter name must not be empty");
  if (values.empty()) throw InvalidArgument("categorical parameter '" + name + "' has no values");
  std::set<std::string> seen;
  for (const auto& v : values) {
    if (!seen.insert(v).second) {
      throw InvalidArgument("categorical parameter '" + name + "' repeats value '" + v + "'");
    }
  }
  const auto n = values.size();
  return ParameterSpec(std::move(name), CategoricalDomain{std::move(values)}, n);
}

ParameterSpec ParameterSpec::numeric(std::string name, double min, double max, double step) {
  if (name.empty()) throw InvalidArgument("parameter name must not be empty");
  if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step)) {
    throw InvalidArgument("numeric parameter '" + name + "' has non-finite bounds");
  }
  if (min > max) throw InvalidArgument("numeric parameter '" + name + "' has min > max");
  if (step <= 0) throw InvalidArgument("numeric parameter '" + name + "' needs step > 0");
  const auto n = grid_count(min, max, step);
  return ParameterSpec(std::move(name), NumericDomain{min, max, step}, n);
}

double ParameterSpec::numeric_value(std::size_t k) const {
  const auto& d = numeric_domain();
  return d.min + static_cast<double>(k) * d.step;
}

const std::string& ParameterSpec::label(std::size_t k) const { return categorical_domain().values.at(k); }

std::optional<std::size_t> ParameterSpec::index_of_label(std::string_view label) const {
  if (!is_categorical()) return std::nullopt;
  const auto& values = categorical_domain().values;
  const auto it = std::find(values.begin(), values.end(), label);
  if (it == values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

std::optional<std::size_t> ParameterSpec::index_of_value(double v) const {
  if (is_categorical() || !std::isfinite(v)) return std::nullopt;
  const auto& d = numeric_domain();
  const double k = std::round((v - d.min) / d.step);
  if (k < 0 || k >= static_cast<double>(size_)) return std::nullopt;
  if (std::abs(d.min + k * d.step - v) > kGridTolerance * std::max(1.0, d.step)) return std::nullopt;
  return static_cast<std::size_t>(k);
}

std::size_t DesignPointHash::operator()(const DesignPoint& p) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : p.index) {
    h ^= v;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> parameters) : parameters_(std::move(parameters)) {
  std::set<std::string> names;
  for (const auto& p : parameters_) {
    if (!names.insert(p.name()).second) throw InvalidArgument("duplicate parameter name '" + p.name() + "'");
  }
}

std::optional<std::size_t> ParameterSpace::find(std::string_view name) const {
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (parameters_[i].name() == name) return i;
  }
  return std::nullopt;
}

bool ParameterSpace::contains(const DesignPoint& point) const noexcept {
  if (point.index.size() != parameters_.size()) return false;
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (point.index[i] >= parameters_[i].size()) return false;
  }
  return true;
}

void ParameterSpace::validate(const DesignPoint& point) const {
  if (point.index.size() != parameters_.size()) {
    throw InvalidArgument("design point has " + std::to_string(point.index.size()) + " values, space has " +
                          std::to_string(parameters_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (point.index[i] >= parameters_[i].size()) {
      throw InvalidArgument("value index " + std::to_string(point.index[i]) + " out of domain for '" +
                            parameters_[i].name() + "'");
    }
  }
}

std::size_t ParameterSpace::encoded_dimension() const noexcept {
  std::size_t dim = 0;
  for (const auto& p : parameters_) dim += p.is_categorical() ? p.size() : 1;
  return dim;
}

std::uint64_t ParameterSpace::rank(const DesignPoint& point) const {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < parameters_.size(); ++i) r = r * parameters_[i].size() + point.index[i];
  return r;
}

DesignPoint ParameterSpace::unrank(std::uint64_t rank) const {
  DesignPoint p;
  p.index.resize(parameters_.size());
  for (std::size_t i = parameters_.size(); i-- > 0;) {
    const auto n = parameters_[i].size();
    p.index[i] = static_cast<std::uint32_t>(rank % n);
    rank /= n;
  }
  return p;
}

ParamValue ParameterSpace::value(const DesignPoint& point, std::size_t i) const {
  const auto& spec = parameters_.at(i);
  if (spec.is_categorical()) return spec.label(point.index.at(i));
  return spec.numeric_value(point.index.at(i));
}

NamedDesign ParameterSpace::named(const DesignPoint& point) const {
  validate(point);
  NamedDesign out;
  out.reserve(parameters_.size());
  for (std::size_t i = 0; i < parameters_.size(); ++i) out.emplace_back(parameters_[i].name(), value(point, i));
  return out;
}

DesignPoint ParameterSpace::from_named(const NamedDesign& design) const {
  DesignPoint p;
  p.index.assign(parameters_.size(), 0);
  std::vector<bool> seen(parameters_.size(), false);
  for (const auto& [name, val] : design) {
    const auto i = find(name);
    if (!i) throw InvalidArgument("unknown parameter '" + name + "'");
    if (seen[*i]) throw InvalidArgument("parameter '" + name + "' given twice");
    seen[*i] = true;
    const auto& spec = parameters_[*i];
    std::optional<std::size_t> k;
    if (spec.is_categorical()) {
      if (const auto* s = std::get_if<std::string>(&val)) k = spec.index_of_label(*s);
    } else if (const auto* d = std::get_if<double>(&val)) {
      k = spec.index_of_value(*d);
    }
    if (!k) throw InvalidArgument("value " + to_string(val) + " is outside the domain of '" + name + "'");
    p.index[*i] = static_cast<std::uint32_t>(*k);
  }
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (!seen[i]) throw InvalidArgument("missing parameter '" + parameters_[i].name() + "'");
  }
  return p;
}

bool operator==(const ParameterSpace& a, const ParameterSpace& b) { return space_to_json(a) == space_to_json(b); }

BigCount cardinality(const ParameterSpace& space) {
  BigCount n = 1;
  for (const auto& p : space.parameters()) n *= p.size();
  return n;
}

std::optional<std::uint64_t> cardinality_u64(const ParameterSpace& space) {
  const BigCount n = cardinality(space);
  if (n > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  return n.convert_to<std::uint64_t>();
}

DesignPoint sample_uniform(const ParameterSpace& space, Rng& rng) {
  DesignPoint p;
  p.index.resize(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) p.index[i] = static_cast<std::uint32_t>(rng.below(space[i].size()));
  return p;
}

std::vector<DesignPoint> enumerate(const ParameterSpace& space, std::uint64_t limit) {
  const auto n = cardinality_u64(space);
  if (!n || *n > limit) throw InvalidArgument("space too large to enumerate");
  std::vector<DesignPoint> points;
  points.reserve(*n);
  for (std::uint64_t r = 0; r < *n; ++r) points.push_back(space.unrank(r));
  return points;
}

void encode_into(const ParameterSpace& space, const DesignPoint& point, std::span<double> out) {
  space.validate(point);
  if (out.size() != space.encoded_dimension()) throw InvalidArgument("encode buffer has wrong dimension");
  std::size_t col = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& spec = space[i];
    if (spec.is_categorical()) {
      for (std::size_t k = 0; k < spec.size(); ++k) out[col + k] = (k == point.index[i]) ? 1.0 : 0.0;
      col += spec.size();
    } else {
      const auto& d = spec.numeric_domain();
      const double span = d.max - d.min;
      out[col++] = span > 0 ? (spec.numeric_value(point.index[i]) - d.min) / span : 0.0;
    }
  }
}

std::vector<double> encode(const ParameterSpace& space, const DesignPoint& point) {
  std::vector<double> out(space.encoded_dimension());
  encode_into(space, point, out);
  return out;
}

DesignPoint decode(const ParameterSpace& space, std::span<const double> features) {
  if (features.size() != space.encoded_dimension()) throw InvalidArgument("feature vector has wrong dimension");
  DesignPoint p;
  p.index.resize(space.size());
  std::size_t col = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& spec = space[i];
    if (spec.is_categorical()) {
      const auto block = features.subspan(col, spec.size());
      p.index[i] = static_cast<std::uint32_t>(std::max_element(block.begin(), block.end()) - block.begin());
      col += spec.size();
    } else {
      const auto& d = spec.numeric_domain();
      const double k = std::round(features[col++] * (d.max - d.min) / d.step);
      p.index[i] = static_cast<std::uint32_t>(std::clamp(k, 0.0, static_cast<double>(spec.size() - 1)));
    }
  }
  return p;
}

DesignPoint resample_parameter(const ParameterSpace& space, const DesignPoint& point, std::size_t position,
                               Rng& rng) {
  DesignPoint out = point;
  const auto n = space[position].size();
  if (n <= 1) return out;
  auto k = static_cast<std::uint32_t>(rng.below(n - 1));
  if (k >= point.index[position]) ++k;
  out.index[position] = k;
  return out;
}

DesignPoint neighbor(const ParameterSpace& space, const DesignPoint& point, Rng& rng) {
  if (space.size() == 0) return point;
  const auto position = static_cast<std::size_t>(rng.below(space.size()));
  return resample_parameter(space, point, position, rng);
}

ParameterSpace space_from_json(const Json& doc) {
  const Json& params = doc.contains("parameters") ? doc.at("parameters") : doc;
  if (!params.is_array()) throw InvalidArgument("space document needs a 'parameters' array");
  std::vector<ParameterSpec> specs;
  try {
    for (const auto& p : params) {
      const auto name = p.at("name").get<std::string>();
      const auto kind = p.at("kind").get<std::string>();
      if (kind == "categorical") {
        specs.push_back(ParameterSpec::categorical(name, p.at("values").get<std::vector<std::string>>()));
      } else if (kind == "numeric") {
        specs.push_back(ParameterSpec::numeric(name, p.at("min").get<double>(), p.at("max").get<double>(),
                                               p.at("step").get<double>()));
      } else {
        throw InvalidArgument("parameter '" + name + "' has unknown kind '" + kind + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed space document: ") + e.what());
  }
  return ParameterSpace(std::move(specs));
}

Json space_to_json(const ParameterSpace& space) {
  Json params = Json::array();
  for (const auto& p : space.parameters()) {
    Json entry;
    entry["name"] = p.name();
    if (p.is_categorical()) {
      entry["kind"] = "categorical";
      entry["values"] = p.categorical_domain().values;
    } else {
      const auto& d = p.numeric_domain();
      entry["kind"] = "numeric";
      entry["min"] = d.min;
      entry["max"] = d.max;
      entry["step"] = d.step;
    }
    params.push_back(std::move(entry));
  }
  return Json{{"parameters", std::move(params)}};
}

ParameterSpace load_space_file(const std::filesystem::path& path) { return space_from_json(read_json_file(path)); }

Json named_to_json(const NamedDesign& design) {
  Json obj = Json::object();
  for (const auto& [name, val] : design) {
    std::visit([&](const auto& v) { obj[name] = v; }, val);
  }
  return obj;
}

NamedDesign named_from_json(const Json& obj) {
  if (!obj.is_object()) throw InvalidArgument("design must be an object");
  NamedDesign out;
  for (const auto& [name, val] : obj.items()) {
    if (val.is_string()) {
      out.emplace_back(name, val.get<std::string>());
    } else if (val.is_number()) {
      out.emplace_back(name, val.get<double>());
    } else {
      throw InvalidArgument("design value for '" + name + "' must be a string or number");
    }
  }
  return out;
}

std::string to_string(const ParamValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  std::ostringstream os;
  os << std::get<double>(value);
  return os.str();
}

}  // namespace dsegym
