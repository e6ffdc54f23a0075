#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "limitflow/report.hpp"

namespace limitflow::runner {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parsed run configuration. Top-level keys: experiment, seed, tolerance,
// out, params; anything else is rejected, as are unknown params keys.
struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 7;
  std::optional<double> tolerance;
  std::string out;
  json params = json::object();

  static RunConfig from_json(const json& j);
  static RunConfig from_file(const std::filesystem::path& path);
  json to_json() const;
};

struct ParamSpec {
  std::string name;
  std::string type;
  json default_value;
  std::string description;
};

struct ExperimentInfo {
  std::string id;
  std::string summary;
  std::vector<ParamSpec> params;
};

// Sorted by id.
const std::vector<ExperimentInfo>& catalog();
std::vector<std::string> list_experiments();
// Parameter schema; throws ConfigError with a nearest-match hint.
json describe(const std::string& id);
std::string nearest_experiment(const std::string& id);

// Params merged over the declared defaults.
json resolved_params(const RunConfig& config);

Report run_experiment(const RunConfig& config);

struct RunResult {
  int exit_code = 0;
  std::string message;
  Report report;
  json manifest;
};

// Runs and writes verdict.json, manifest.json and one CSV per table into
// out_dir. Exit codes: 0 pass, 1 verdict failure, 2 config error, 3 cap.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir);

// Building blocks of the catalog, also used directly by the test suite.
Report constant_smoke(int dim);
Report strictness_report(std::uint64_t seed);
Report diagnostics_report(std::uint64_t seed, int levels, int dim, double tol);
Report evolution_ensemble(std::uint64_t seed, int dim, int levels, bool vanishing, double tol);
Report evolution_check_report(std::uint64_t seed, int dim, int levels, double tol);
Report trotter_report(std::uint64_t seed, int dim, double t, const std::vector<int>& k_list);

// Worker count from LIMITFLOW_WORKERS (default 1).
int worker_count();

}  // namespace limitflow::runner
