// SPDX-License-Identifier: Apache-2.0
//
// nfkit <experiment> [--config FILE] [--seed N] [--out DIR] [--workers N] [--format csv|json]
// nfkit validate --config FILE
// nfkit defaults <experiment>
// nfkit list
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nfkit/errors.hpp"
#include "nfkit/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

namespace rn = nfkit::runner;

rn::Json load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw nfkit::ConfigurationError(path + ": cannot open config file");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw nfkit::ConfigurationError(path + ": config file is empty");
  return rn::parse_config(text, path);
}

std::string names() {
  std::string out;
  for (const auto& n : rn::experiment_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nfkit: near-field array signal processing experiments"};
  app.set_version_flag("--version", std::string(NFKIT_VERSION));
  std::string command;
  std::string target;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  std::optional<std::string> format;
  app.add_option("command", command, "experiment name, or validate | defaults | list")->required();
  app.add_option("experiment", target, "experiment name for 'defaults'");
  app.add_option("--config,-c", config_path, "JSON config file");
  app.add_option("--seed", seed, "root seed override");
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--format", format, "result format")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (command == "list") {
      for (const auto& n : rn::experiment_names()) std::cout << n << "  " << rn::experiment_summary(n) << "\n";
      return 0;
    }
    if (command == "defaults") {
      if (target.empty()) throw nfkit::ConfigurationError("defaults needs an experiment name; valid names: " + names());
      std::cout << rn::default_config(target).dump(2) << "\n";
      return 0;
    }
    if (!target.empty()) throw nfkit::ConfigurationError("unexpected argument '" + target + "'");

    if (command == "validate") {
      if (config_path.empty()) throw nfkit::ConfigurationError("validate needs --config FILE");
      const rn::ValidationReport rep = rn::validate(load(config_path));
      std::cout << rep.to_string();
      if (rep.has_errors()) return kExitConfig;
      std::cout << "ok: " << rep.experiment << "\n";
      return 0;
    }

    rn::Json user = config_path.empty() ? rn::Json::object() : load(config_path);
    rn::Overrides ov{command, seed, out_dir, workers, format};
    std::vector<rn::Finding> warnings;
    const rn::ExperimentConfig cfg = rn::resolve_config(rn::apply_overrides(std::move(user), ov), &warnings);
    for (const auto& w : warnings) std::cerr << "warning " << w.path << ": " << w.message << "\n";

    rn::RunResult result;
    try {
      result = rn::run(cfg);
    } catch (const nfkit::StageError& e) {
      std::cerr << "runtime failure in stage '" << e.stage() << "': " << e.what() << "\n";
      return kExitRuntime;
    } catch (const std::exception& e) {
      std::cerr << "runtime failure in stage 'run': " << e.what() << "\n";
      return kExitRuntime;
    }
    const rn::WrittenFiles files = rn::write_outputs(result, cfg);
    std::cout << files.results << "\n";
    return 0;
  } catch (const nfkit::ConfigurationError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return kExitConfig;
  } catch (const nfkit::StageError& e) {
    std::cerr << "runtime failure in stage '" << e.stage() << "': " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
}
