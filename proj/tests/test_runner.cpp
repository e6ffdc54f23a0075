#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "limitflow/runner.hpp"

using namespace limitflow;
using namespace limitflow::runner;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("limitflow_runner_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("runner") {
  TEST_CASE("catalog is sorted with at least ten experiments") {
    const auto ids = list_experiments();
    CHECK(ids.size() >= 10);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
  }

  TEST_CASE("describe returns parameter schemas and hints on typos") {
    CHECK(describe("classical-limit")["params"].contains("hbar_chain"));
    try {
      describe("clasical-limit");
      FAIL("expected error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("classical-limit") != std::string::npos);
    }
  }

  TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(RunConfig::from_json({{"experiment", "thompson"}, {"colour", 1}}), ConfigError);
    RunConfig c = RunConfig::from_json({{"experiment", "mean-field"}, {"params", {{"n_maximum", 4}}}});
    CHECK_THROWS_AS(resolved_params(c), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json({{"seed", 3}}), ConfigError);
  }

  TEST_CASE("constant smoke run exits 0 with one report and a manifest") {
    const auto out = scratch("smoke");
    const RunResult r = run(RunConfig::from_json({{"experiment", "constant-smoke"}}), out);
    CHECK(r.exit_code == 0);
    CHECK(r.report.name == "constant_smoke");
    CHECK(std::filesystem::exists(out / "manifest.json"));
    CHECK(std::filesystem::exists(out / "verdict.json"));
    const json m = json::parse(slurp(out / "manifest.json"));
    for (const auto& f : m["files"]) CHECK(fnv1a_hex(slurp(out / f["path"].get<std::string>())) == f["fnv1a"]);
  }

  TEST_CASE("config errors exit 2 and caps exit 3") {
    RunConfig bad = RunConfig::from_json({{"experiment", "mean-field"}, {"params", {{"N_max", "eight"}}}});
    CHECK(run(bad, scratch("bad")).exit_code == 2);
    RunConfig unknown;
    unknown.experiment = "nope";
    CHECK(run(unknown, scratch("unknown")).exit_code == 2);
    RunConfig cap = RunConfig::from_json({{"experiment", "mean-field"}, {"params", {{"N_max", 12}}}});
    const RunResult r = run(cap, scratch("cap"));
    CHECK(r.exit_code == 3);
    CHECK(r.message.find("cap") != std::string::npos);
  }

  TEST_CASE("identical configs reproduce identical bytes") {
    const RunConfig c = RunConfig::from_json({{"experiment", "thompson"}, {"seed", 5}});
    const auto a = scratch("det_a"), b = scratch("det_b");
    run(c, a);
    run(c, b);
    for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = std::filesystem::relative(entry.path(), a);
      CHECK(slurp(entry.path()) == slurp(b / rel));
    }
  }

  TEST_CASE("strictness and diagnostics experiments pass") {
    CHECK(strictness_report(7).all_pass());
    CHECK(diagnostics_report(7, 8, 4, 1e-2).all_pass());
  }
}
