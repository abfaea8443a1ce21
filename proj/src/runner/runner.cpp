// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "internal.hpp"

#ifndef NFKIT_VERSION
#define NFKIT_VERSION "unknown"
#endif

namespace nfkit::runner {

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw StageError("write-output", "cannot open " + path.string());
  f << text;
  if (!f) throw StageError("write-output", "failed writing " + path.string());
}

std::string render(const ResultTable& t, OutputFormat format) {
  return format == OutputFormat::Json ? t.to_json().dump(2) + "\n" : t.to_csv();
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  const detail::Experiment& exp = detail::find_experiment(config.experiment);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result = exp.run(config);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.table.meta = {NFKIT_VERSION, config_hash(config.document), config.seed, elapsed, started};
  return result;
}

WrittenFiles write_outputs(const RunResult& result, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StageError("write-output", "cannot create " + dir.string() + ": " + ec.message());

  const std::string ext = config.format == OutputFormat::Json ? ".json" : ".csv";
  WrittenFiles files;
  files.results = (dir / (config.experiment + ext)).string();
  write_file(files.results, render(result.table, config.format));
  for (const auto& [name, table] : result.auxiliary) {
    const std::string p = (dir / (config.experiment + "." + name + ext)).string();
    write_file(p, render(table, config.format));
    files.auxiliary.push_back(p);
  }
  files.config = (dir / (config.experiment + ".config.json")).string();
  write_file(files.config, config.document.dump(2) + "\n");

  const ResultMeta& m = result.table.meta;
  Json meta;
  meta["tool_version"] = m.tool_version;
  meta["experiment"] = config.experiment;
  meta["config_hash"] = m.config_hash;
  meta["seed"] = m.seed;
  meta["columns"] = result.table.columns();
  meta["rows"] = result.table.rows().size();
  meta["timing"] = {{"started_utc", m.started_utc}, {"wall_time_s", m.wall_time_s}};
  files.meta = (dir / (config.experiment + ".meta.json")).string();
  write_file(files.meta, meta.dump(2) + "\n");
  return files;
}

}  // namespace nfkit::runner
