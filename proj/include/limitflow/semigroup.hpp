#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "limitflow/inductive.hpp"

namespace limitflow::semigroup {

// Generator at one level: a dense matrix on vectorized elements, or a
// matrix-free action with a norm bound (used for large Liouvillians).
class LevelOperator {
 public:
  static LevelOperator from_matrix(Mat a);
  static LevelOperator from_function(std::function<Mat(const Mat&)> apply, double norm_bound);

  Mat apply(const Mat& x) const;
  bool has_dense() const { return dense_.has_value(); }
  const Mat& dense() const;
  double norm_bound() const { return norm_bound_; }

 private:
  std::optional<Mat> dense_;
  std::function<Mat(const Mat&)> fn_;
  double norm_bound_ = 0.0;
};

struct GeneratorNet {
  std::vector<LevelOperator> ops;
  bool dissipative = false;

  static GeneratorNet from_matrices(const std::vector<Mat>& mats, bool dissipative);
  std::size_t size() const { return ops.size(); }
  const LevelOperator& operator[](std::size_t i) const { return ops.at(i); }
};

class SingularLevel : public Error {
 public:
  SingularLevel(const std::string& what, std::vector<std::size_t> levels)
      : Error(what), levels(std::move(levels)) {}
  std::vector<std::size_t> levels;
};

struct ResolventNet {
  cplx lambda;
  std::vector<Mat> resolvents;

  static ResolventNet build(const SoftSystem& system, const GeneratorNet& gen, cplx lambda);
};

ElementNet apply_generator(const SoftSystem& system, const GeneratorNet& gen, const ElementNet& net);
ElementNet evolve(const SoftSystem& system, const GeneratorNet& gen, double t, const ElementNet& net);
std::vector<ElementNet> evolve(const SoftSystem& system, const GeneratorNet& gen, double t,
                               const std::vector<ElementNet>& nets);
ElementNet resolvent_apply(const SoftSystem& system, const GeneratorNet& gen, cplx lambda,
                           const ElementNet& net);
std::vector<ElementNet> resolvent_apply(const SoftSystem& system, const GeneratorNet& gen,
                                        cplx lambda, const std::vector<ElementNet>& nets);

Report dissipativity_margin(const SoftSystem& system, const GeneratorNet& gen,
                            const std::vector<double>& lambdas, const std::vector<ElementNet>& probes,
                            double tol = kExactTol);

// Residual of the best approximation of each probe from span(images),
// relative to the probe norm (Euclidean on vectorized elements).
std::vector<double> span_residuals(const std::vector<Mat>& images, const std::vector<Mat>& probes);

struct CheckOptions {
  double tol = kTrendTol;
  double density_threshold = 1e-6;
};

Report check_semigroup_convergence(const SoftSystem& system, const GeneratorNet& gen,
                                   const std::vector<double>& t_grid,
                                   const std::vector<ElementNet>& corpus, const CheckOptions& opts = {});

Report check_resolvent_convergence(const SoftSystem& system, const GeneratorNet& gen, cplx lambda,
                                   const std::vector<ElementNet>& corpus,
                                   const std::vector<Mat>& density_probes, const LimitModel& model,
                                   const CheckOptions& opts = {},
                                   std::optional<cplx> second_lambda = std::nullopt);

Report check_net_core(const SoftSystem& system, const GeneratorNet& gen, cplx lambda,
                      const std::vector<ElementNet>& domain, const std::vector<Mat>& density_probes,
                      const LimitModel& model, const CheckOptions& opts = {});

Report well_definedness_probe(const SoftSystem& system, const GeneratorNet& gen,
                              const std::vector<ElementNet>& null_corpus, double tol = kExactTol);

Report trotter_defect(const SoftSystem& system, const GeneratorNet& gen_t, const GeneratorNet& gen_s,
                      double t, const std::vector<int>& k_list, const std::vector<ElementNet>& corpus);

Report relative_bound_fit(const SoftSystem& system, const GeneratorNet& gen_a,
                          const GeneratorNet& gen_b, const std::vector<ElementNet>& probes,
                          double b_max);

struct AnalyticRadius {
  double radius = 0.0;
  bool infinite = false;
  std::vector<double> log_seminorms;
  std::vector<double> ratios;
};

AnalyticRadius analytic_radius(const SoftSystem& system, const GeneratorNet& gen,
                               const ElementNet& net, int k_max);

struct EvolutionOptions {
  double t0 = 1.0;
  cplx lambda = 1.0;
  CheckOptions check;
  double agreement_tol = 1e-8;
};

struct EvolutionVerdict {
  Report condition1;
  Report condition2;
  Report condition3;
  bool cross_consistent = false;
  double limit_action_gap = 0.0;
  Table samples;

  bool pass() const { return condition1.pass && condition2.pass && condition3.pass && cross_consistent; }
  Report to_report() const;
  json to_json() const { return to_report().to_json(); }
};

// Runs conditions (1)-(3) on a corpus and cross-checks the implied limit
// dynamics: exp(t A_inf) built from the limit resolvent against the
// condition-(1) limit action.
EvolutionVerdict evolution_check(const SoftSystem& system, const GeneratorNet& gen,
                                 const std::vector<ElementNet>& corpus,
                                 const std::vector<Mat>& density_probes, const LimitModel& model,
                                 const EvolutionOptions& opts = {});

}  // namespace limitflow::semigroup
