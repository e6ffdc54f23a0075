#include "limitflow/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace limitflow::semigroup {

LevelOperator LevelOperator::from_matrix(Mat a) {
  if (a.rows() != a.cols()) throw ShapeError("generator matrix not square");
  LevelOperator op;
  op.norm_bound_ = operator_norm(a);
  op.dense_ = std::move(a);
  return op;
}

LevelOperator LevelOperator::from_function(std::function<Mat(const Mat&)> apply, double norm_bound) {
  LevelOperator op;
  op.fn_ = std::move(apply);
  op.norm_bound_ = norm_bound;
  return op;
}

Mat LevelOperator::apply(const Mat& x) const {
  if (dense_) {
    if (dense_->cols() != x.size()) throw ShapeError("generator does not match element dimension");
    return unvectorize(*dense_ * vectorize(x), x.rows(), x.cols());
  }
  return fn_(x);
}

const Mat& LevelOperator::dense() const {
  if (!dense_) throw Unsupported("generator has no dense matrix");
  return *dense_;
}

GeneratorNet GeneratorNet::from_matrices(const std::vector<Mat>& mats, bool dissipative) {
  GeneratorNet g;
  for (const auto& m : mats) g.ops.push_back(LevelOperator::from_matrix(m));
  g.dissipative = dissipative;
  return g;
}

namespace {

void check_gen(const SoftSystem& system, const GeneratorNet& gen) {
  if (gen.size() != system.size()) throw ShapeError("generator net length does not match chain");
  for (std::size_t i = 0; i < gen.size(); ++i)
    if (gen[i].has_dense() && gen[i].dense().rows() != system.level(i).dim())
      throw ShapeError("generator dimension does not match level");
}

Mat apply_dense(const Mat& m, const Mat& x) { return unvectorize(m * vectorize(x), x.rows(), x.cols()); }

std::vector<std::optional<Mat>> propagators(const GeneratorNet& gen, double t) {
  std::vector<std::optional<Mat>> out(gen.size());
  for (std::size_t i = 0; i < gen.size(); ++i)
    if (gen[i].has_dense()) out[i] = expm(Mat(t * gen[i].dense()));
  return out;
}

Mat propagate(const LevelOperator& op, const std::optional<Mat>& prop, double t, const Mat& x) {
  if (prop) return apply_dense(*prop, x);
  return expm_apply([&op](const Mat& y) { return op.apply(y); }, x, t, op.norm_bound());
}

Mat matrix_power(Mat base, int k) {
  Mat result = Mat::Identity(base.rows(), base.cols());
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

}  // namespace

ElementNet apply_generator(const SoftSystem& system, const GeneratorNet& gen, const ElementNet& net) {
  check_gen(system, gen);
  check_net(system, net);
  return map_net(net, [&](std::size_t i, const Mat& x) { return gen[i].apply(x); });
}

std::vector<ElementNet> evolve(const SoftSystem& system, const GeneratorNet& gen, double t,
                               const std::vector<ElementNet>& nets) {
  if (t < 0.0) throw Error("evolve: negative time (only semigroups are modeled)");
  check_gen(system, gen);
  const auto props = propagators(gen, t);
  std::vector<ElementNet> out;
  for (const auto& net : nets) {
    check_net(system, net);
    out.push_back(map_net(net, [&](std::size_t i, const Mat& x) { return propagate(gen[i], props[i], t, x); }));
  }
  return out;
}

ElementNet evolve(const SoftSystem& system, const GeneratorNet& gen, double t, const ElementNet& net) {
  return evolve(system, gen, t, std::vector<ElementNet>{net}).front();
}

ResolventNet ResolventNet::build(const SoftSystem& system, const GeneratorNet& gen, cplx lambda) {
  check_gen(system, gen);
  ResolventNet r;
  r.lambda = lambda;
  std::vector<std::size_t> singular;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const Mat& a = gen[i].dense();
    const Mat shifted = lambda * Mat::Identity(a.rows(), a.cols()) - a;
    Eigen::PartialPivLU<Mat> lu(shifted);
    const Mat inv = lu.inverse();
    const double cond = operator_norm(shifted) * operator_norm(inv);
    if (!inv.allFinite() || !(cond < 1e14)) {
      singular.push_back(i);
      r.resolvents.push_back(Mat());
    } else {
      r.resolvents.push_back(inv);
    }
  }
  if (!singular.empty()) {
    std::ostringstream os;
    os << "resolvent: lambda - A_n singular at level(s)";
    for (auto s : singular) os << " " << system.chain().label(s);
    throw SingularLevel(os.str(), singular);
  }
  return r;
}

std::vector<ElementNet> resolvent_apply(const SoftSystem& system, const GeneratorNet& gen,
                                        cplx lambda, const std::vector<ElementNet>& nets) {
  const ResolventNet r = ResolventNet::build(system, gen, lambda);
  std::vector<ElementNet> out;
  for (const auto& net : nets) {
    check_net(system, net);
    out.push_back(map_net(net, [&](std::size_t i, const Mat& x) { return apply_dense(r.resolvents[i], x); }));
  }
  return out;
}

ElementNet resolvent_apply(const SoftSystem& system, const GeneratorNet& gen, cplx lambda,
                           const ElementNet& net) {
  return resolvent_apply(system, gen, lambda, std::vector<ElementNet>{net}).front();
}

Report dissipativity_margin(const SoftSystem& system, const GeneratorNet& gen,
                            const std::vector<double>& lambdas, const std::vector<ElementNet>& probes,
                            double tol) {
  check_gen(system, gen);
  Report r;
  r.name = "dissipativity";
  Table t;
  t.columns = {"n", "margin"};
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < system.size(); ++i) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& p : probes) {
      const Mat& y = p[i];
      const Mat ay = gen[i].apply(y);
      const double ny = system.level(i).norm_of(y);
      for (double lam : lambdas) {
        if (!(lam > 0.0)) throw Error("dissipativity: lambda samples must be positive");
        margin = std::min(margin, system.level(i).norm_of(lam * y - ay) - lam * ny);
      }
    }
    t.add({system.chain().label(i), margin});
    worst = std::min(worst, margin);
  }
  r.tables["margin"] = t;
  r.values["min_margin"] = worst;
  r.values["tolerance"] = tol;
  r.pass = worst >= -tol;
  r.verdict = r.pass ? "dissipative" : "not-dissipative";
  return r;
}

std::vector<double> span_residuals(const std::vector<Mat>& images, const std::vector<Mat>& probes) {
  std::vector<double> out;
  if (images.empty()) {
    for (std::size_t i = 0; i < probes.size(); ++i) out.push_back(1.0);
    return out;
  }
  const Eigen::Index d = images.front().size();
  Mat c(d, static_cast<Eigen::Index>(images.size()));
  for (std::size_t j = 0; j < images.size(); ++j) c.col(j) = vectorize(images[j]);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(c);
  for (const auto& p : probes) {
    const Vec v = vectorize(p);
    const Vec coef = cod.solve(v);
    const double pn = v.norm();
    out.push_back(pn > 0 ? (c * coef - v).norm() / pn : 0.0);
  }
  return out;
}

Report check_semigroup_convergence(const SoftSystem& system, const GeneratorNet& gen,
                                   const std::vector<double>& t_grid,
                                   const std::vector<ElementNet>& corpus, const CheckOptions& opts) {
  Report r;
  r.name = "condition1_semigroup";
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end(), std::greater<>());
  Table evolved;
  evolved.columns = {"t", "net", "dhat_last", "convergent"};
  Table cont;
  cont.columns = {"t", "net", "seminorm_shift"};
  bool corpus_ok = true;
  for (const auto& x : corpus) corpus_ok = corpus_ok && jconvergence_diagnostic(system, x, opts.tol).convergent();
  bool all_conv = true;
  std::vector<std::vector<double>> shifts(corpus.size());
  for (double t : ts) {
    const auto out = evolve(system, gen, t, corpus);
    for (std::size_t c = 0; c < corpus.size(); ++c) {
      const auto rep = jconvergence_diagnostic(system, out[c], opts.tol);
      evolved.add({t, double(c), rep.dhat.back(), rep.convergent() ? 1.0 : 0.0});
      all_conv = all_conv && rep.convergent();
      const double s = tail_seminorm(system, add(out[c], corpus[c], -1.0));
      shifts[c].push_back(s);
      cont.add({t, double(c), s});
    }
  }
  bool continuity = true;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const auto& s = shifts[c];
    const double scale = 1.0 + tail_seminorm(system, corpus[c]);
    bool all_tiny = true;
    for (double v : s) all_tiny = all_tiny && v <= kExactTol * scale;
    if (all_tiny) continue;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] > s[i - 1] * (1 + 1e-12)) continuity = false;
    if (s.size() > 1 && !(s.back() < s.front())) continuity = false;
  }
  r.tables["evolved"] = evolved;
  r.tables["continuity"] = cont;
  r.notes["corpus"] = corpus_ok ? "convergent" : "contains-nonconvergent-nets";
  r.notes["strong_continuity"] = continuity ? "pass" : "fail";
  r.values["tolerance"] = opts.tol;
  r.pass = corpus_ok && all_conv && continuity && !corpus.empty();
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report check_resolvent_convergence(const SoftSystem& system, const GeneratorNet& gen, cplx lambda,
                                   const std::vector<ElementNet>& corpus,
                                   const std::vector<Mat>& density_probes, const LimitModel& model,
                                   const CheckOptions& opts, std::optional<cplx> second_lambda) {
  Report r;
  r.name = "condition2_resolvent";
  if (!(lambda.real() > 0.0)) throw Error("resolvent check needs Re lambda > 0");
  const auto images = resolvent_apply(system, gen, lambda, corpus);
  Table t;
  t.columns = {"net", "dhat_last", "convergent"};
  bool all_conv = true;
  std::vector<Mat> limits;
  for (std::size_t c = 0; c < images.size(); ++c) {
    const auto rep = jconvergence_diagnostic(system, images[c], opts.tol);
    t.add({double(c), rep.dhat.back(), rep.convergent() ? 1.0 : 0.0});
    all_conv = all_conv && rep.convergent();
    limits.push_back(model.limit_of(images[c]));
  }
  const auto res = span_residuals(limits, density_probes);
  Table d;
  d.columns = {"probe", "residual"};
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    d.add({double(i), res[i]});
    worst = std::max(worst, res[i]);
  }
  r.tables["resolved"] = t;
  r.tables["density"] = d;
  r.values["max_residual"] = worst;
  r.values["threshold"] = opts.density_threshold;
  if (second_lambda) {
    const auto images2 = resolvent_apply(system, gen, *second_lambda, corpus);
    std::vector<Mat> limits2;
    for (const auto& n : images2) limits2.push_back(model.limit_of(n));
    const auto res2 = span_residuals(limits2, density_probes);
    double diff = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) diff = std::max(diff, std::abs(res[i] - res2[i]));
    r.values["lambda_independence_gap"] = diff;
  }
  const bool dense = !density_probes.empty() && worst < opts.density_threshold;
  r.notes["density"] = density_probes.empty() ? "no-probes" : (dense ? "pass" : "fail");
  r.pass = all_conv && dense && !corpus.empty();
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report check_net_core(const SoftSystem& system, const GeneratorNet& gen, cplx lambda,
                      const std::vector<ElementNet>& domain, const std::vector<Mat>& density_probes,
                      const LimitModel& model, const CheckOptions& opts) {
  Report r;
  r.name = "condition3_core";
  if (domain.empty()) {
    r.pass = false;
    r.verdict = "fail";
    r.notes["density"] = "empty domain: nothing to span";
    return r;
  }
  Table t;
  t.columns = {"net", "x_convergent", "ax_convergent", "shifted_convergent"};
  bool ok = true;
  std::vector<Mat> limits;
  for (std::size_t c = 0; c < domain.size(); ++c) {
    const auto& x = domain[c];
    const ElementNet ax = apply_generator(system, gen, x);
    const ElementNet shifted = add(scale(x, lambda), ax, -1.0);
    const bool cx = jconvergence_diagnostic(system, x, opts.tol).convergent();
    const bool cax = jconvergence_diagnostic(system, ax, opts.tol).convergent();
    const bool cs = jconvergence_diagnostic(system, shifted, opts.tol).convergent();
    t.add({double(c), double(cx), double(cax), double(cs)});
    if (!(cx && cax)) r.notes["domain_violation_" + std::to_string(c)] = "net not in the net domain";
    ok = ok && cx && cax && cs;
    limits.push_back(model.limit_of(shifted));
  }
  const auto res = span_residuals(limits, density_probes);
  Table d;
  d.columns = {"probe", "residual"};
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    d.add({double(i), res[i]});
    worst = std::max(worst, res[i]);
  }
  r.tables["domain"] = t;
  r.tables["density"] = d;
  r.values["max_residual"] = worst;
  r.values["threshold"] = opts.density_threshold;
  const bool dense = !density_probes.empty() && worst < opts.density_threshold;
  r.pass = ok && dense;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report well_definedness_probe(const SoftSystem& system, const GeneratorNet& gen,
                              const std::vector<ElementNet>& null_corpus, double tol) {
  Report r;
  r.name = "well_definedness";
  double scale_a = 0.0;
  for (std::size_t i = 0; i < gen.size(); ++i) scale_a = std::max(scale_a, gen[i].norm_bound());
  Table t;
  t.columns = {"net", "input_seminorm", "image_seminorm"};
  double worst = 0.0;
  for (std::size_t c = 0; c < null_corpus.size(); ++c) {
    const double in = tail_seminorm(system, null_corpus[c]);
    const double out = tail_seminorm(system, apply_generator(system, gen, null_corpus[c]));
    t.add({double(c), in, out});
    worst = std::max(worst, out);
  }
  const double threshold = tol * (1.0 + scale_a);
  r.tables["images"] = t;
  r.values["max_image_seminorm"] = worst;
  r.values["threshold"] = threshold;
  r.pass = worst < threshold;
  r.verdict = r.pass ? "well-defined" : "null-net-not-preserved";
  return r;
}

Report trotter_defect(const SoftSystem& system, const GeneratorNet& gen_t, const GeneratorNet& gen_s,
                      double t, const std::vector<int>& k_list, const std::vector<ElementNet>& corpus) {
  check_gen(system, gen_t);
  check_gen(system, gen_s);
  if (t < 0.0) throw Error("trotter: negative time");
  Report r;
  r.name = "trotter";
  const std::size_t levels = system.size();
  std::vector<std::optional<Mat>> full(levels);
  for (std::size_t i = 0; i < levels; ++i)
    if (gen_t[i].has_dense() && gen_s[i].has_dense()) full[i] = expm(Mat(t * (gen_t[i].dense() + gen_s[i].dense())));
  std::vector<ElementNet> exact;
  for (const auto& x : corpus) {
    exact.push_back(map_net(x, [&](std::size_t i, const Mat& y) {
      if (full[i]) return apply_dense(*full[i], y);
      auto both = [&](const Mat& z) { return Mat(gen_t[i].apply(z) + gen_s[i].apply(z)); };
      return expm_apply(both, y, t, gen_t[i].norm_bound() + gen_s[i].norm_bound());
    }));
  }
  Table tab;
  tab.columns = {"k", "net", "error"};
  std::vector<double> worst_per_k;
  for (int k : k_list) {
    if (k <= 0) throw Error("trotter: k must be positive");
    const double h = t / k;
    std::vector<std::optional<Mat>> step(levels);
    for (std::size_t i = 0; i < levels; ++i)
      if (gen_t[i].has_dense() && gen_s[i].has_dense())
        step[i] = expm(Mat(h * gen_t[i].dense())) * expm(Mat(h * gen_s[i].dense()));
    double worst = 0.0;
    for (std::size_t c = 0; c < corpus.size(); ++c) {
      ElementNet y = map_net(corpus[c], [&](std::size_t i, const Mat& x) {
        Mat z = x;
        if (step[i]) {
          return apply_dense(matrix_power(*step[i], k), z);
        }
        for (int s = 0; s < k; ++s) {
          z = expm_apply([&](const Mat& v) { return gen_s[i].apply(v); }, z, h, gen_s[i].norm_bound());
          z = expm_apply([&](const Mat& v) { return gen_t[i].apply(v); }, z, h, gen_t[i].norm_bound());
        }
        return z;
      });
      const double e = tail_seminorm(system, add(y, exact[c], -1.0));
      tab.add({double(k), double(c), e});
      worst = std::max(worst, e);
    }
    worst_per_k.push_back(worst);
  }
  Table ratios;
  ratios.columns = {"k", "ratio"};
  bool ratio_ok = true;
  bool tiny = true;
  for (double w : worst_per_k) tiny = tiny && w < 1e-10;
  for (std::size_t i = 1; i < worst_per_k.size(); ++i) {
    const double ratio = worst_per_k[i] > 0 ? worst_per_k[i - 1] / worst_per_k[i]
                                            : std::numeric_limits<double>::infinity();
    ratios.add({double(k_list[i]), ratio});
    if (!(ratio >= 1.5 && ratio <= 2.5)) ratio_ok = false;
  }
  r.tables["errors"] = tab;
  r.tables["ratios"] = ratios;
  r.values["max_error"] = worst_per_k.empty() ? 0.0 : *std::max_element(worst_per_k.begin(), worst_per_k.end());
  r.pass = tiny || ratio_ok;
  r.verdict = tiny ? "commuting" : (ratio_ok ? "first-order" : "order-violated");
  return r;
}

Report relative_bound_fit(const SoftSystem& system, const GeneratorNet& gen_a,
                          const GeneratorNet& gen_b, const std::vector<ElementNet>& probes,
                          double b_max) {
  check_gen(system, gen_a);
  check_gen(system, gen_b);
  Report r;
  r.name = "relative_bound";
  Table t;
  t.columns = {"n", "a", "b"};
  double a_uniform = 0.0;
  bool feasible = true;
  for (std::size_t i = 0; i < system.size(); ++i) {
    struct Sample { double ax, bx, x; };
    std::vector<Sample> samples;
    for (const auto& p : probes) {
      const Mat& x = p[i];
      const double nx = system.level(i).norm_of(x);
      if (nx == 0.0) throw Error("relative bound: zero probe");
      samples.push_back({system.level(i).norm_of(gen_a[i].apply(x)), system.level(i).norm_of(gen_b[i].apply(x)), nx});
    }
    double a = 0.0;
    for (const auto& s : samples) {
      const double excess = s.bx - b_max * s.x;
      if (excess <= 1e-14 * std::max(1.0, s.bx)) continue;
      if (s.ax == 0.0) {
        feasible = false;
        a = std::numeric_limits<double>::infinity();
        break;
      }
      a = std::max(a, excess / s.ax);
    }
    double b = 0.0;
    if (std::isfinite(a))
      for (const auto& s : samples) b = std::max(b, (s.bx - a * s.ax) / s.x);
    b = std::max(b, 0.0);
    if (b < 1e-13) b = 0.0;
    t.add({system.chain().label(i), a, b});
    a_uniform = std::max(a_uniform, a);
  }
  r.tables["fit"] = t;
  r.values["a_uniform"] = a_uniform;
  r.values["b_max"] = b_max;
  r.notes["feasible"] = feasible ? "yes" : "no";
  r.pass = feasible && a_uniform < 1.0;
  r.verdict = !feasible ? "infeasible" : (r.pass ? "relatively-bounded" : "a-not-below-one");
  return r;
}

AnalyticRadius analytic_radius(const SoftSystem& system, const GeneratorNet& gen,
                               const ElementNet& net, int k_max) {
  if (k_max < 4) throw Error("analytic radius needs k_max >= 4");
  AnalyticRadius out;
  ElementNet y = net;
  double log_s = std::log(std::max(tail_seminorm(system, y), 0.0));
  out.log_seminorms.push_back(log_s);
  if (!std::isfinite(log_s)) {
    out.infinite = true;
    out.radius = std::numeric_limits<double>::infinity();
    return out;
  }
  y = scale(y, 1.0 / std::exp(log_s));
  for (int k = 1; k <= k_max; ++k) {
    y = apply_generator(system, gen, y);
    const double s = tail_seminorm(system, y);
    if (s == 0.0 || s < 1e-300) {
      out.infinite = true;
      out.radius = std::numeric_limits<double>::infinity();
      out.log_seminorms.push_back(-std::numeric_limits<double>::infinity());
      return out;
    }
    log_s += std::log(s);
    out.log_seminorms.push_back(log_s);
    y = scale(y, 1.0 / s);
  }
  // q_k = s_{k+1} / ((k+1) s_k)
  for (int k = 0; k < k_max; ++k)
    out.ratios.push_back(std::exp(out.log_seminorms[k + 1] - out.log_seminorms[k]) / (k + 1));
  bool entire = true;
  const int start = k_max / 2;
  for (int k = std::max(1, start); k < k_max; ++k)
    if (out.ratios[k] * (k + 1) > out.ratios[k - 1] * k * (1 + 1e-9)) entire = false;
  if (entire) {
    out.infinite = true;
    out.radius = std::numeric_limits<double>::infinity();
    return out;
  }
  const double qmax = *std::max_element(out.ratios.begin(), out.ratios.end());
  out.radius = 1.0 / qmax;
  return out;
}

Report EvolutionVerdict::to_report() const {
  Report r;
  r.name = "evolution";
  r.children = {condition1, condition2, condition3};
  r.values["limit_action_gap"] = limit_action_gap;
  r.notes["cross_consistent"] = cross_consistent ? "yes" : "no";
  r.tables["samples"] = samples;
  r.pass = pass();
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

EvolutionVerdict evolution_check(const SoftSystem& system, const GeneratorNet& gen,
                                 const std::vector<ElementNet>& corpus,
                                 const std::vector<Mat>& density_probes, const LimitModel& model,
                                 const EvolutionOptions& opts) {
  EvolutionVerdict v;
  const std::vector<double> t_grid = {opts.t0, opts.t0 / 2, opts.t0 / 4, opts.t0 / 8};
  v.condition1 = check_semigroup_convergence(system, gen, t_grid, corpus, opts.check);
  v.condition2 = check_resolvent_convergence(system, gen, opts.lambda, corpus, density_probes, model, opts.check);
  const auto domain = resolvent_apply(system, gen, opts.lambda, corpus);
  v.condition3 = check_net_core(system, gen, opts.lambda, domain, density_probes, model, opts.check);

  const Eigen::Index d = model.space.dim();
  if (d > 256 || !model.lift) {
    v.cross_consistent = false;
    v.limit_action_gap = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  std::vector<ElementNet> basis;
  for (Eigen::Index i = 0; i < d; ++i) {
    Mat e = model.space.zero();
    e(i % model.space.rows, i / model.space.rows) = 1.0;
    basis.push_back(model.lift(e));
  }
  const auto resolved = resolvent_apply(system, gen, opts.lambda, basis);
  Mat r_inf(d, d);
  for (Eigen::Index i = 0; i < d; ++i) r_inf.col(i) = vectorize(model.limit_of(resolved[i]));
  const Mat a_inf = opts.lambda * Mat::Identity(d, d) - r_inf.partialPivLu().inverse();
  const Mat flow = expm(Mat(opts.t0 * a_inf));
  const auto evolved = evolve(system, gen, opts.t0, corpus);
  v.samples.columns = {"net", "gap"};
  double gap = 0.0;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const Vec from_resolvent = flow * vectorize(model.limit_of(corpus[c]));
    const Vec from_semigroup = vectorize(model.limit_of(evolved[c]));
    const double g = (from_resolvent - from_semigroup).norm() / std::max(1.0, from_semigroup.norm());
    v.samples.add({double(c), g});
    gap = std::max(gap, g);
  }
  v.limit_action_gap = gap;
  v.cross_consistent = gap < opts.agreement_tol;
  return v;
}

}  // namespace limitflow::semigroup
