// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nfkit/errors.hpp"
#include "nfkit/parallel.hpp"
#include "nfkit/runner.hpp"

using namespace nfkit;
using namespace nfkit::runner;

namespace {

std::string error_of(const Json& user) {
  try {
    resolve_config(user);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("every experiment has a complete default document that resolves") {
  const auto& names = experiment_names();
  CHECK(names.size() == 12);
  for (const auto& n : names) {
    const Json d = default_config(n);
    CHECK(d["schema_version"] == kSchemaVersion);
    CHECK(d["experiment"] == n);
    CHECK_FALSE(experiment_summary(n).empty());
    const ExperimentConfig c = resolve_config(d);
    CHECK(c.experiment == n);
    CHECK(c.document == d);
  }
  CHECK_THROWS_AS(default_config("nope"), ConfigurationError);
}

TEST_CASE("unknown keys are rejected with their path") {
  const std::string e = error_of({{"experiment", "regions"}, {"geometry", {{"num_elemnts", 3}}}});
  CHECK(contains(e, "/geometry/num_elemnts"));
  CHECK(contains(e, "num_elements"));
  CHECK(contains(error_of({{"experiment", "regions"}, {"bogus", 1}}), "/bogus"));
}

TEST_CASE("type and value checks") {
  CHECK(contains(error_of({{"experiment", "music2d"}, {"trials", 2.5}}), "/trials"));
  CHECK(contains(error_of({{"experiment", "music2d"}, {"trials", 0}}), "/trials"));
  CHECK(contains(error_of({{"experiment", "music2d"}, {"seed", -1}}), "/seed"));
  CHECK(contains(error_of({{"experiment", "music2d"}, {"scenario", {{"snr_db", "high"}}}}), "/scenario/snr_db"));
  CHECK(contains(error_of({{"experiment", "music2d"}, {"schema_version", 2}}), "schema_version"));
  CHECK(contains(error_of({{"experiment", "nope"}}), "music2d"));
  CHECK(contains(error_of(Json::object()), "experiment"));
  CHECK(contains(error_of({{"experiment", "music2d"}, {"output", {{"format", "xml"}}}}), "/output/format"));
  // A float default accepts integers.
  CHECK(error_of({{"experiment", "music2d"}, {"scenario", {{"snr_db", 15}}}}).empty());
  // Null defaults are derived values and accept numbers.
  CHECK(error_of({{"experiment", "music2d"}, {"params", {{"range_min_m", 0.3}}}}).empty());
  // Non-symmetric arrays are refused by the cumulant experiment.
  CHECK_FALSE(error_of({{"experiment", "mixed-cumulant"}, {"geometry", {{"num_elements", 32}}}}).empty());
}

TEST_CASE("validation collects findings") {
  const ValidationReport bad = validate({{"experiment", "regions"}, {"trials", 3}});
  CHECK(bad.has_errors());
  CHECK(contains(bad.to_string(), "/trials"));
  const ValidationReport good = validate({{"experiment", "regions"}});
  CHECK_FALSE(good.has_errors());
  CHECK(good.experiment == "regions");
}

TEST_CASE("config text parsing") {
  const Json j = parse_config("// comment\n{\"experiment\": \"regions\", /* c */ \"seed\": 4}\n");
  CHECK(j["seed"] == 4);
  try {
    parse_config("{\n  \"experiment\": \"regions\",\n  \"seed\": ,\n}", "cfg.json");
    FAIL("expected a syntax error");
  } catch (const ConfigurationError& e) {
    CHECK(contains(e.what(), "cfg.json:3:"));
  }
}

TEST_CASE("overrides") {
  Overrides o;
  o.experiment = "regions";
  o.seed = 77;
  o.workers = 3;
  o.format = "json";
  o.out_dir = "x";
  const ExperimentConfig c = resolve_config(apply_overrides(Json::object(), o));
  CHECK(c.seed == 77);
  CHECK(c.workers == 3);
  CHECK(c.format == OutputFormat::Json);
  CHECK(c.out_dir == "x");
  Overrides clash;
  clash.experiment = "music2d";
  CHECK_THROWS_AS(apply_overrides({{"experiment", "regions"}}, clash), ConfigurationError);
}

TEST_CASE("config hash ignores workers and output only") {
  const Json a = resolve_config({{"experiment", "regions"}}).document;
  Json b = a;
  b["workers"] = 4;
  b["output"]["dir"] = "/elsewhere";
  Json c = a;
  c["seed"] = 2;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("result table formatting") {
  ResultTable t({"a", "b", "c"});
  t.add_row({std::int64_t{3}, 0.1, std::string("x,y")});
  t.add_row({std::int64_t{-1}, std::numeric_limits<double>::infinity(), std::string("q\"r")});
  CHECK(t.to_csv() == "a,b,c\n3,0.10000000000000001,\"x,y\"\n-1,inf,\"q\"\"r\"\n");
  const Json j = t.to_json();
  CHECK(j["rows"][1][1] == "inf");
  CHECK(j["rows"][0][1].get<double>() == 0.1);
  CHECK_THROWS_AS(t.add_row({std::int64_t{1}}), DomainError);
  CHECK(t.column_index("c") == 2);
}

TEST_CASE("parallel map keeps index order and rethrows") {
  const auto v = parallel_map(50, 3, [](int i) { return i * i; });
  for (int i = 0; i < 50; ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_AS(parallel_map(10, 2,
                               [](int i) {
                                 if (i == 7) throw std::runtime_error("seven");
                                 return i;
                               }),
                  std::runtime_error);
}

TEST_CASE("runs are deterministic and independent of the worker count") {
  for (const std::string exp : {"music2d", "chanest-nmse", "mvdr", "wigner-pr"}) {
    Json user = {{"experiment", exp}, {"trials", 3}};
    const RunResult a = run(resolve_config(user));
    const RunResult b = run(resolve_config(user));
    user["workers"] = 2;
    const RunResult c = run(resolve_config(user));
    CHECK(a.table.to_csv() == b.table.to_csv());
    CHECK(a.table.to_csv() == c.table.to_csv());
    CHECK(a.table.meta.config_hash == c.table.meta.config_hash);
    user["seed"] = 99;
    CHECK(run(resolve_config(user)).table.to_csv() != a.table.to_csv());
  }
}

TEST_CASE("regions run reports the Fraunhofer distance") {
  const RunResult r = run(resolve_config({{"experiment", "regions"}}));
  const auto col = r.table.column_index("fraunhofer_m");
  CHECK(std::get<double>(r.table.rows()[0][col]) == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("outputs are written next to their metadata") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nfkit_runner_test";
  fs::remove_all(dir);
  const ExperimentConfig c =
      resolve_config({{"experiment", "squint"},
                      {"params", {{"dump_beampattern", true}}},
                      {"output", {{"dir", dir.string()}, {"format", "json"}}}});
  const WrittenFiles f = write_outputs(run(c), c);
  CHECK(fs::exists(f.results));
  CHECK(f.results == (dir / "squint.json").string());
  REQUIRE(f.auxiliary.size() == 1);
  CHECK(fs::exists(dir / "squint.beampattern.json"));
  const Json meta = Json::parse(slurp(f.meta));
  CHECK(meta["experiment"] == "squint");
  CHECK(meta["config_hash"] == config_hash(c.document));
  CHECK(meta["timing"]["wall_time_s"].get<double>() >= 0.0);
  CHECK(Json::parse(slurp(f.config)) == c.document);
  fs::remove_all(dir);
}
