// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <sstream>

#include "internal.hpp"
#include "nfkit/rng.hpp"

namespace nfkit::runner {

namespace detail {

Node Node::operator[](const char* key) const {
  if (!value_->is_object() || !value_->contains(key)) fail(std::string("missing key '") + key + "'");
  return Node((*value_)[key], path_ + "/" + key);
}

Node Node::at(std::size_t i) const {
  if (!value_->is_array() || i >= value_->size()) fail("index " + std::to_string(i) + " out of range");
  return Node((*value_)[i], path_ + "/" + std::to_string(i));
}

void Node::fail(const std::string& message) const { throw ConfigurationError(path_ + ": " + message); }

double Node::number() const {
  if (!value_->is_number()) fail("expected a number");
  const double v = value_->get<double>();
  if (!std::isfinite(v)) fail("expected a finite number");
  return v;
}

std::optional<double> Node::optional_number() const {
  if (value_->is_null()) return std::nullopt;
  return number();
}

double Node::positive() const {
  const double v = number();
  if (!(v > 0.0)) fail("must be positive, got " + value_->dump());
  return v;
}

double Node::in_range(double lo, double hi) const {
  const double v = number();
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << "must lie in [" << lo << ", " << hi << "], got " << v;
    fail(os.str());
  }
  return v;
}

int Node::integer() const {
  if (!value_->is_number_integer()) fail("expected an integer");
  const auto v = value_->get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) fail("integer out of range");
  return static_cast<int>(v);
}

int Node::at_least(int lo) const {
  const int v = integer();
  if (v < lo) fail("must be at least " + std::to_string(lo) + ", got " + std::to_string(v));
  return v;
}

std::optional<int> Node::optional_integer() const {
  if (value_->is_null()) return std::nullopt;
  return integer();
}

bool Node::boolean() const {
  if (!value_->is_boolean()) fail("expected true or false");
  return value_->get<bool>();
}

std::string Node::string() const {
  if (!value_->is_string()) fail("expected a string");
  return value_->get<std::string>();
}

std::string Node::choice(std::initializer_list<const char*> allowed) const {
  const std::string v = string();
  for (const char* a : allowed)
    if (v == a) return v;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  fail("'" + v + "' is not one of: " + list);
}

std::vector<double> Node::numbers() const {
  if (!value_->is_array()) fail("expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
  return out;
}

std::vector<int> Node::integers() const {
  if (!value_->is_array()) fail("expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).integer());
  return out;
}

Json geometry_block(const GeometryDefaults& d) {
  Json g;
  g["num_elements"] = d.num_elements;
  g["carrier_freq_hz"] = d.carrier_freq_hz ? Json(*d.carrier_freq_hz) : Json(nullptr);
  g["wavelength_m"] = d.wavelength_m ? Json(*d.wavelength_m) : Json(nullptr);
  g["spacing_m"] = nullptr;
  g["spacing_wavelengths"] = d.spacing_wavelengths;
  g["phase_reference"] = d.phase_reference;
  g["propagation_speed_mps"] = d.propagation_speed_mps;
  return g;
}

ArrayGeometry geometry_from(const Node& g) {
  const int N = g["num_elements"].at_least(2);
  const auto fc = g["carrier_freq_hz"].optional_number();
  const auto lambda = g["wavelength_m"].optional_number();
  const double c = g["propagation_speed_mps"].positive();
  if (fc.has_value() == lambda.has_value())
    g.fail("give exactly one of carrier_freq_hz and wavelength_m (the other is derived)");
  if (fc && !(*fc > 0.0)) g["carrier_freq_hz"].fail("must be positive");
  if (lambda && !(*lambda > 0.0)) g["wavelength_m"].fail("must be positive");
  const double wl = lambda ? *lambda : c / *fc;
  const auto spacing_m = g["spacing_m"].optional_number();
  const double d = spacing_m ? *spacing_m : g["spacing_wavelengths"].positive() * wl;
  if (!(d > 0.0)) g["spacing_m"].fail("must be positive");
  const std::string ref = g["phase_reference"].choice({"first", "center"});
  try {
    ArrayGeometry geom =
        lambda ? ArrayGeometry::from_wavelength(N, d, wl, 0, c) : ArrayGeometry(N, d, *fc, 0, c);
    return ref == "center" ? geom.centered() : geom;
  } catch (const DomainError& e) {
    g.fail(e.what());
  }
}

Json skeleton(const std::string& experiment, std::optional<int> trials) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = experiment;
  j["seed"] = 1;
  if (trials) j["trials"] = *trials;
  j["workers"] = 1;
  j["output"] = {{"dir", "."}, {"format", "csv"}};
  return j;
}

std::uint64_t trial_seed(const ExperimentConfig& config, int trial) {
  return derive_seed(config.seed, {stream_tag(config.experiment), static_cast<std::uint64_t>(trial)});
}

const Experiment& find_experiment(const std::string& name) {
  for (const Experiment& e : registry())
    if (name == e.name) return e;
  std::string list;
  for (const Experiment& e : registry()) list += (list.empty() ? "" : ", ") + std::string(e.name);
  throw ConfigurationError("/experiment: unknown experiment '" + name + "'; valid names: " + list);
}

}  // namespace detail

namespace {

using detail::Node;

const char* type_name(const Json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

bool type_matches(const Json& def, const Json& user) {
  if (def.is_null()) return user.is_null() || user.is_number();
  if (def.is_number_integer()) return user.is_number_integer();
  if (def.is_number()) return user.is_number();
  if (def.is_boolean()) return user.is_boolean();
  if (def.is_string()) return user.is_string();
  if (def.is_array()) return user.is_array();
  return user.is_object();
}

// Merges `user` over `def`, recording every schema violation.
Json merge(const Json& def, const Json& user, const std::string& path, std::vector<Finding>& errors) {
  auto error = [&](const std::string& p, const std::string& m) {
    errors.push_back({Finding::Severity::Error, p, m});
  };
  if (!type_matches(def, user)) {
    error(path, std::string("expected ") + (def.is_null() ? "a number or null" : type_name(def)) + ", got " +
                    type_name(user));
    return def;
  }
  if (def.is_object()) {
    Json out = def;
    for (auto it = user.begin(); it != user.end(); ++it) {
      const std::string p = path + "/" + it.key();
      if (!def.contains(it.key())) {
        std::string known;
        for (auto d = def.begin(); d != def.end(); ++d) known += (known.empty() ? "" : ", ") + d.key();
        error(p, "unknown key; allowed here: " + known);
        continue;
      }
      out[it.key()] = merge(def[it.key()], it.value(), p, errors);
    }
    return out;
  }
  if (def.is_array() && !def.empty()) {
    // Elements follow the shape of the first default element; object
    // elements get that element's defaults for omitted keys.
    Json out = Json::array();
    for (std::size_t i = 0; i < user.size(); ++i)
      out.push_back(merge(def[0], user[i], path + "/" + std::to_string(i), errors));
    return out;
  }
  return user;
}

std::string join_findings(const std::vector<Finding>& findings) {
  std::string out;
  for (const Finding& f : findings) {
    if (!out.empty()) out += "\n";
    out += (f.path.empty() ? std::string("(document)") : f.path) + ": " + f.message;
  }
  return out;
}

struct Resolution {
  ExperimentConfig config;
  std::vector<Finding> errors;
  std::vector<Finding> warnings;
};

Resolution resolve_impl(const Json& user) {
  Resolution res;
  auto error = [&](const std::string& p, const std::string& m) {
    res.errors.push_back({Finding::Severity::Error, p, m});
  };
  if (!user.is_object()) {
    error("", "config must be a JSON object");
    return res;
  }
  if (!user.contains("experiment") || !user["experiment"].is_string()) {
    std::string list;
    for (const std::string& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
    error("/experiment", "missing experiment name; valid names: " + list);
    return res;
  }
  const std::string name = user["experiment"].get<std::string>();
  const detail::Experiment* exp = nullptr;
  try {
    exp = &detail::find_experiment(name);
  } catch (const ConfigurationError& e) {
    error("/experiment", std::string(e.what()).substr(std::string("/experiment: ").size()));
    return res;
  }
  res.config.experiment = name;
  const Json def = exp->defaults();
  Json doc = merge(def, user, "", res.errors);
  if (doc["schema_version"] != kSchemaVersion)
    error("/schema_version", "unsupported schema version " + doc["schema_version"].dump() + "; this build reads " +
                                 std::to_string(kSchemaVersion));
  if (!res.errors.empty()) return res;

  try {
    const Node root(doc, "");
    const Json& seed = doc["seed"];
    if (!(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0)))
      root["seed"].fail("must be a non-negative integer");
    res.config.seed = seed.get<std::uint64_t>();
    res.config.workers = root["workers"].at_least(0);
    if (doc.contains("trials")) root["trials"].at_least(1);
    res.config.out_dir = root["output"]["dir"].string();
    res.config.format = root["output"]["format"].choice({"csv", "json"}) == "json" ? OutputFormat::Json
                                                                                      : OutputFormat::Csv;
    exp->check(doc, res.warnings);
  } catch (const ConfigurationError& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (!msg.empty() && msg[0] == '/' && colon != std::string::npos)
      error(msg.substr(0, colon), msg.substr(colon + 2));
    else
      error("", msg);
  } catch (const DomainError& e) {
    error("", e.what());
  }
  res.config.document = std::move(doc);
  return res;
}

}  // namespace

bool ValidationReport::has_errors() const {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Finding::Severity::Error; });
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const Finding& f : findings) {
    out += f.severity == Finding::Severity::Error ? "error " : "warning ";
    out += (f.path.empty() ? std::string("(document)") : f.path) + ": " + f.message + "\n";
  }
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const detail::Experiment& e : detail::registry()) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

std::string experiment_summary(const std::string& experiment) {
  return detail::find_experiment(experiment).summary;
}

Json default_config(const std::string& experiment) { return detail::find_experiment(experiment).defaults(); }

Json parse_config(const std::string& text, const std::string& source_name) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    if (pos != std::string::npos) what = what.substr(pos);
    throw ConfigurationError(source_name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

Json apply_overrides(Json user, const Overrides& o) {
  if (!user.is_object()) return user;
  if (o.experiment) {
    if (user.contains("experiment") && user["experiment"] != *o.experiment)
      throw ConfigurationError("/experiment: config names '" + user["experiment"].dump() +
                               "' but the command line asks for '" + *o.experiment + "'");
    user["experiment"] = *o.experiment;
  }
  if (o.seed) user["seed"] = *o.seed;
  if (o.workers) user["workers"] = *o.workers;
  if (o.out_dir || o.format) {
    if (!user.contains("output")) user["output"] = Json::object();
    if (!user["output"].is_object()) throw ConfigurationError("/output: expected object");
    if (o.out_dir) user["output"]["dir"] = *o.out_dir;
    if (o.format) user["output"]["format"] = *o.format;
  }
  return user;
}

ExperimentConfig resolve_config(const Json& user, std::vector<Finding>* warnings) {
  Resolution r = resolve_impl(user);
  if (!r.errors.empty()) throw ConfigurationError(join_findings(r.errors));
  if (warnings) *warnings = std::move(r.warnings);
  return std::move(r.config);
}

ValidationReport validate(const Json& user) {
  Resolution r = resolve_impl(user);
  ValidationReport rep{r.config.experiment, std::move(r.errors)};
  rep.findings.insert(rep.findings.end(), r.warnings.begin(), r.warnings.end());
  return rep;
}

}  // namespace nfkit::runner
