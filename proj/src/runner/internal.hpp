// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "nfkit/array_model.hpp"
#include "nfkit/errors.hpp"
#include "nfkit/runner.hpp"

namespace nfkit::runner::detail {

// Read-only view of a resolved config value that knows its JSON pointer.
// Values have already been type-checked against the defaults; the
// accessors here add range checks and report failures by path.
class Node {
 public:
  Node(const Json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  Node operator[](const char* key) const;
  Node at(std::size_t i) const;
  std::size_t size() const { return value_->size(); }
  bool is_null() const { return value_->is_null(); }
  const Json& json() const { return *value_; }
  const std::string& path() const { return path_; }

  double number() const;
  std::optional<double> optional_number() const;
  double positive() const;
  double in_range(double lo, double hi) const;
  int integer() const;
  int at_least(int lo) const;
  std::optional<int> optional_integer() const;
  bool boolean() const;
  std::string string() const;
  std::string choice(std::initializer_list<const char*> allowed) const;
  std::vector<double> numbers() const;
  std::vector<int> integers() const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const Json* value_;
  std::string path_;
};

// Geometry block shared by most experiments.
struct GeometryDefaults {
  int num_elements;
  std::optional<double> carrier_freq_hz;
  std::optional<double> wavelength_m;
  double spacing_wavelengths = 0.5;
  const char* phase_reference = "first";
  double propagation_speed_mps = kSpeedOfLight;
};

Json geometry_block(const GeometryDefaults& d);
ArrayGeometry geometry_from(const Node& g);

// Top-level skeleton: schema_version, experiment, seed, [trials], workers, output.
Json skeleton(const std::string& experiment, std::optional<int> trials);

std::uint64_t trial_seed(const ExperimentConfig& config, int trial);

using Warnings = std::vector<Finding>;

struct Experiment {
  const char* name;
  const char* summary;
  Json (*defaults)();
  // Cross-field checks on a schema-valid document: throw ConfigurationError
  // for errors, append warnings.
  void (*check)(const Json& document, Warnings& warnings);
  RunResult (*run)(const ExperimentConfig& config);
};

const std::vector<Experiment>& registry();
const Experiment& find_experiment(const std::string& name);

}  // namespace nfkit::runner::detail
