#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "limitflow/runner.hpp"

namespace lr = limitflow::runner;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "seed for randomized probes");
  app->add_option("--tol", f.tol, "trend tolerance override");
}

int execute(const std::string& experiment, const Flags& f) {
  lr::RunConfig config;
  try {
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) throw lr::ConfigError("cannot open config " + f.config);
      limitflow::json j;
      try {
        j = limitflow::json::parse(in);
      } catch (const limitflow::json::parse_error& e) {
        throw lr::ConfigError(std::string("config parse error: ") + e.what());
      }
      if (!experiment.empty()) {
        if (!j.is_object()) throw lr::ConfigError("config must be an object");
        if (!j.contains("experiment")) j["experiment"] = experiment;
        if (j["experiment"] != experiment)
          throw lr::ConfigError("config names experiment " + j["experiment"].dump() + " but subcommand is " +
                                experiment);
      }
      config = lr::RunConfig::from_json(j);
    } else {
      if (experiment.empty()) throw lr::ConfigError("run requires --config");
      config.experiment = experiment;
    }
    if (f.seed) config.seed = *f.seed;
    if (f.tol) {
      if (!(*f.tol > 0.0)) throw lr::ConfigError("--tol must be positive");
      config.tolerance = *f.tol;
    }
    lr::resolved_params(config);
  } catch (const lr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  std::string out = f.out.empty() ? config.out : f.out;
  if (out.empty()) out = "limitflow-out/" + config.experiment;
  const lr::RunResult res = lr::run(config, out);
  if (res.exit_code == 0 || res.exit_code == 1) {
    for (const auto& [path, verdict] : res.manifest["verdicts"].items())
      if (path.find('/') == std::string::npos || verdict == "fail")
        std::cout << verdict.get<std::string>() << "  " << path << "\n";
    std::cout << "outputs: " << out << "\n";
  } else {
    std::cerr << res.message << "\n";
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limitflow: soft inductive limits and scale-limit experiments"};
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  for (const auto& id : lr::list_experiments()) {
    CLI::App* sub = app.add_subcommand(id, lr::describe(id)["summary"].get<std::string>());
    add_flags(sub, flags);
    sub->callback([&chosen, id] { chosen = id; });
  }
  CLI::App* run = app.add_subcommand("run", "run the experiment named in a config file");
  add_flags(run, flags);
  run->callback([&chosen] { chosen = ""; });

  CLI::App* list = app.add_subcommand("list", "list experiment ids");
  std::string describe_id;
  CLI::App* describe = app.add_subcommand("describe", "print the parameter schema of an experiment");
  describe->add_option("id", describe_id, "experiment id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (list->parsed()) {
    for (const auto& id : lr::list_experiments()) std::cout << id << "\n";
    return 0;
  }
  if (describe->parsed()) {
    try {
      std::cout << lr::describe(describe_id).dump(2) << "\n";
      return 0;
    } catch (const lr::ConfigError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
  }
  return execute(chosen, flags);
}
