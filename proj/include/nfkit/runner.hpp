// SPDX-License-Identifier: Apache-2.0
//
// Configuration-driven experiment runner.
//
// A config is a JSON document (comments allowed):
//
//   { "schema_version": 1, "experiment": "music2d", "seed": 7, "trials": 100,
//     "workers": 1, "geometry": {...}, "scenario": {...}, "params": {...},
//     "output": {"dir": ".", "format": "csv"} }
//
// Every experiment publishes a complete default document (see
// default_config). A user document is merged over it: unknown keys and type
// mismatches are rejected with the JSON pointer of the offending field. A
// null default marks a derived value that may be left null or set
// explicitly.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>  // vendored nlohmann/json

namespace nfkit::runner {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class OutputFormat { Csv, Json };

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::Csv;
  Json document;  // fully resolved, defaults applied
};

struct Finding {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string path;  // JSON pointer, empty for document-level findings
  std::string message;
};

struct ValidationReport {
  std::string experiment;
  std::vector<Finding> findings;

  bool has_errors() const;
  std::string to_string() const;
};

const std::vector<std::string>& experiment_names();
std::string experiment_summary(const std::string& experiment);

// Throws ConfigurationError listing the valid names for an unknown experiment.
Json default_config(const std::string& experiment);

// Parses config text; syntax errors carry "<source>:<line>:<column>".
Json parse_config(const std::string& text, const std::string& source_name = "<config>");

// Command-line overrides applied on top of the file.
struct Overrides {
  std::optional<std::string> experiment;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  std::optional<std::string> format;
};

Json apply_overrides(Json user, const Overrides& overrides);

// Schema merge plus the experiment's cross-field checks. Errors throw
// ConfigurationError (all findings in the message); warnings are returned.
ExperimentConfig resolve_config(const Json& user, std::vector<Finding>* warnings = nullptr);

// Same checks without throwing and without running anything.
ValidationReport validate(const Json& user);

using Cell = std::variant<std::int64_t, double, std::string>;

struct ResultMeta {
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::string started_utc;
};

class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;

  // Doubles use %.17g; non-finite values print as inf, -inf, nan.
  std::string to_csv() const;
  // {"columns": [...], "rows": [[...], ...]}; non-finite doubles become strings.
  Json to_json() const;

  ResultMeta meta;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

struct RunResult {
  ResultTable table;
  std::map<std::string, ResultTable> auxiliary;  // extra dumps, e.g. spectra
};

// FNV-1a over the canonical dump of the resolved config, excluding the
// "workers" and "output" entries (they do not change results).
std::string config_hash(const Json& resolved);

RunResult run(const ExperimentConfig& config);

struct WrittenFiles {
  std::string results;
  std::string config;
  std::string meta;
  std::vector<std::string> auxiliary;
};

// Writes <dir>/<experiment>.{csv|json}, <experiment>.config.json,
// <experiment>.meta.json and <experiment>.<name>.{csv|json} per auxiliary table.
WrittenFiles write_outputs(const RunResult& result, const ExperimentConfig& config);

}  // namespace nfkit::runner
