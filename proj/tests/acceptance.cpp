#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "limitflow/runner.hpp"

using namespace limitflow;
using namespace limitflow::runner;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Report run_default(const std::string& id) {
  RunConfig c;
  c.experiment = id;
  return run_experiment(c);
}

std::string first_failure(const Report& r, const std::string& prefix = "") {
  const std::string path = prefix.empty() ? r.name : prefix + "/" + r.name;
  if (!r.pass) return path;
  for (const auto& c : r.children) {
    const std::string f = first_failure(c, path);
    if (!f.empty()) return f;
  }
  return "";
}

Outcome from_report(const Report& r) {
  const bool ok = r.all_pass();
  return {ok, ok ? "" : "first failing check: " + first_failure(r)};
}

bool identical_trees(const std::filesystem::path& a, const std::filesystem::path& b, std::size_t& files) {
  files = 0;
  std::size_t count_b = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++count_b;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto other = b / std::filesystem::relative(e.path(), a);
    if (!std::filesystem::exists(other) || slurp(e.path()) != slurp(other)) return false;
  }
  return files == count_b && files > 0;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "strictness and isometry exactness", 10.0, [] { return from_report(run_default("strictness")); }},
      {2, "soft classical-limit system (heat transform, soft transitivity)", 300.0,
       [] {
         const Report r = run_default("classical-heat");
         Outcome o = from_report(r);
         o.pass = o.pass && r.notes.at("below_threshold") == "yes" && r.notes.at("identity_decreasing") == "yes" &&
                  r.child("soft_transitivity").notes.at("decreasing_along_chain") == "yes";
         return o;
       }},
      {3, "classical-limit dynamics (oscillator ratios, damped Lindblad flow)", 900.0,
       [] {
         const Report r = run_default("classical-limit");
         Outcome o = from_report(r);
         for (const auto& c : r.children)
           if (c.notes.count("resolved_convention")) o.detail += " resolved flow convention " + c.notes.at("resolved_convention");
         return o;
       }},
      {4, "evolution-theorem cross-consistency and counterexample", 60.0,
       [] {
         const Report r = run_default("evolution-check");
         Outcome o = from_report(r);
         o.pass = o.pass && r.child("vanishing_perturbation").value("limit_action_gap") < 1e-8;
         return o;
       }},
      {5, "Trotter interchange", 60.0, [] { return from_report(run_default("trotter")); }},
      {6, "mean field (product defect, bracket, flip limit)", 600.0,
       [] { return from_report(run_default("mean-field")); }},
      {7, "spin chain (bound, stabilization, boundary independence)", 1200.0,
       [] { return from_report(run_default("spin-chain")); }},
      {8, "fermion RG (kernels, projections, covariance flow, dynamics)", 600.0,
       [] { return from_report(run_default("fermion-rg")); }},
      {9, "Thompson action (unitarity, composition, inverse)", 60.0,
       [] { return from_report(run_default("thompson")); }},
      {10, "determinism of the default suite", 1e9,
       [] {
         const auto base = std::filesystem::temp_directory_path() / "limitflow_acceptance";
         std::filesystem::remove_all(base);
         RunConfig c;
         c.experiment = "suite";
         const RunResult a = run(c, base / "a");
         const RunResult b = run(c, base / "b");
         std::size_t files = 0;
         const bool same = identical_trees(base / "a", base / "b", files);
         Outcome o;
         o.pass = same && a.exit_code == b.exit_code && (a.exit_code == 0 || a.exit_code == 1);
         o.detail = std::to_string(files) + " files compared, suite exit code " + std::to_string(a.exit_code);
         return o;
       }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_s;
    const bool ok = o.pass && in_budget;
    if (!in_budget) o.detail += " runtime budget exceeded";
    std::printf("%s criterion %d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                o.detail.empty() ? "" : " - ", o.detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
