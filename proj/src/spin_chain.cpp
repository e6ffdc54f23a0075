#include "limitflow/spin_chain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

namespace limitflow::spin {

namespace {

Eigen::Index dim_of(int sites) { return Eigen::Index(1) << sites; }

void check_length(int length) {
  if (length < 1) throw Error("spin chain: length must be positive");
  if (length > kMaxSites) {
    std::ostringstream os;
    os << "spin chain: " << length << " sites exceed the cap of " << kMaxSites << " (dimension 2^L)";
    throw CapExceeded(os.str());
  }
}

}  // namespace

InteractionSpec InteractionSpec::ising(double coupling, double field) {
  InteractionSpec s;
  if (coupling != 0.0) s.terms.push_back({{0, 1}, Mat(-coupling * kron(pauli_z(), pauli_z()))});
  if (field != 0.0) s.terms.push_back({{0}, Mat(-field * pauli_x())});
  return s;
}

int InteractionSpec::range() const {
  int r = 0;
  for (const auto& t : terms) r = std::max(r, t.offsets.back() - t.offsets.front());
  return r;
}

void InteractionSpec::validate() const {
  for (const auto& t : terms) {
    if (t.offsets.empty() || t.offsets.front() != 0) throw Error("interaction term offsets must start at 0");
    for (std::size_t i = 1; i < t.offsets.size(); ++i)
      if (t.offsets[i] <= t.offsets[i - 1]) throw Error("interaction term offsets must be increasing");
    const Eigen::Index d = dim_of(static_cast<int>(t.offsets.size()));
    if (t.op.rows() != d || t.op.cols() != d) throw ShapeError("interaction term operator size");
    if (!is_hermitian(t.op, 1e-12)) throw Error("interaction term not hermitian");
  }
}

double InteractionSpec::site_sum() const { return weighted_sum(0.0); }

double InteractionSpec::weighted_sum(double lambda) const {
  double s = 0.0;
  for (const auto& t : terms) {
    const double diam = t.offsets.back() - t.offsets.front();
    s += double(t.offsets.size()) * std::exp(lambda * diam) * operator_norm(t.op);
  }
  return s;
}

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::open: return "open";
    case Boundary::periodic: return "periodic";
    case Boundary::antiperiodic: return "antiperiodic";
  }
  return "?";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  if (s == "antiperiodic") return Boundary::antiperiodic;
  throw Error("unknown boundary condition: " + s);
}

int site_index(int length, int position) {
  const int idx = position + length / 2;
  if (idx < 0 || idx >= length) throw Error("position outside the cube");
  return idx;
}

Mat embed(const Mat& op, const std::vector<int>& sites, int length) {
  check_length(length);
  const int k = static_cast<int>(sites.size());
  if (op.rows() != dim_of(k) || op.cols() != dim_of(k)) throw ShapeError("embed: operator size");
  std::vector<bool> used(length, false);
  for (int s : sites) {
    if (s < 0 || s >= length || used[s]) throw Error("embed: invalid site list");
    used[s] = true;
  }
  std::vector<int> rest;
  for (int s = 0; s < length; ++s)
    if (!used[s]) rest.push_back(s);
  auto bit = [length](int site) { return Eigen::Index(1) << (length - 1 - site); };
  std::vector<Eigen::Index> off(dim_of(k), 0), base(dim_of(length - k), 0);
  for (Eigen::Index r = 0; r < dim_of(k); ++r)
    for (int q = 0; q < k; ++q)
      if (r & (Eigen::Index(1) << (k - 1 - q))) off[r] += bit(sites[q]);
  for (Eigen::Index r = 0; r < dim_of(length - k); ++r)
    for (int q = 0; q < length - k; ++q)
      if (r & (Eigen::Index(1) << (length - k - 1 - q))) base[r] += bit(rest[q]);
  Mat out = Mat::Zero(dim_of(length), dim_of(length));
  for (Eigen::Index c = 0; c < op.cols(); ++c)
    for (Eigen::Index r = 0; r < op.rows(); ++r) {
      const cplx v = op(r, c);
      if (v == cplx(0.0)) continue;
      for (Eigen::Index b : base) out(b + off[r], b + off[c]) = v;
    }
  return out;
}

Mat embed_block(const Mat& a, int first, int length) {
  int k = 0;
  while (dim_of(k) < a.rows()) ++k;
  std::vector<int> sites;
  for (int q = 0; q < k; ++q) sites.push_back(site_index(length, first + q));
  return embed(a, sites, length);
}

namespace {

struct Placement {
  std::vector<int> sites;
  const Mat* op;
  double sign;
  bool wraps;
};

std::vector<Placement> placements(const InteractionSpec& spec, int length, Boundary bc) {
  std::vector<Placement> out;
  for (const auto& t : spec.terms) {
    const int span = t.offsets.back();
    for (int s = 0; s < length; ++s) {
      const bool wraps = s + span >= length;
      if (wraps && (bc == Boundary::open || span >= length)) continue;
      std::vector<int> sites;
      for (int o : t.offsets) sites.push_back((s + o) % length);
      std::set<int> uniq(sites.begin(), sites.end());
      if (uniq.size() != sites.size()) continue;
      const double sign = wraps && bc == Boundary::antiperiodic ? -1.0 : 1.0;
      out.push_back({sites, &t.op, sign, wraps});
    }
  }
  return out;
}

}  // namespace

Mat local_hamiltonian(const InteractionSpec& spec, int length, Boundary bc) {
  check_length(length);
  spec.validate();
  Mat h = Mat::Zero(dim_of(length), dim_of(length));
  for (const auto& p : placements(spec, length, bc)) h += p.sign * embed(*p.op, p.sites, length);
  return h;
}

Mat boundary_term(const InteractionSpec& spec, int length, Boundary bc) {
  check_length(length);
  Mat b = Mat::Zero(dim_of(length), dim_of(length));
  for (const auto& p : placements(spec, length, bc))
    if (p.wraps) b += p.sign * embed(*p.op, p.sites, length);
  return b;
}

Derivation derivation_apply(const InteractionSpec& spec, const Mat& a, int first, int length) {
  check_length(length);
  spec.validate();
  int k = 0;
  while (dim_of(k) < a.rows()) ++k;
  if (a.rows() != dim_of(k) || a.cols() != a.rows()) throw ShapeError("derivation: observable size");
  const int b0 = site_index(length, first), b1 = site_index(length, first + k - 1);
  std::vector<Placement> touching;
  int w0 = b0, w1 = b1;
  for (const auto& p : placements(spec, length, Boundary::open)) {
    bool hit = false;
    for (int s : p.sites) hit = hit || (s >= b0 && s <= b1);
    if (!hit) continue;
    touching.push_back(p);
    for (int s : p.sites) {
      w0 = std::min(w0, s);
      w1 = std::max(w1, s);
    }
  }
  const int w = w1 - w0 + 1;
  std::vector<int> block_sites;
  for (int s = b0; s <= b1; ++s) block_sites.push_back(s - w0);
  const Mat aw = embed(a, block_sites, w);
  Mat dw = Mat::Zero(aw.rows(), aw.cols());
  for (const auto& p : touching) {
    std::vector<int> rel;
    for (int s : p.sites) rel.push_back(s - w0);
    dw += kI * commutator(embed(*p.op, rel, w), aw);
  }
  std::vector<int> window;
  for (int s = w0; s <= w1; ++s) window.push_back(s);
  Derivation d;
  d.value = embed(dw, window, length);
  d.norm = operator_norm(dw);
  d.bound = 2.0 * k * spec.site_sum() * operator_norm(a);
  return d;
}

Report decay_profile(const InteractionSpec& spec, const std::vector<double>& lambdas) {
  Report r;
  r.name = "decay_profile";
  r.values["site_sum"] = spec.site_sum();
  r.values["range"] = spec.range();
  Table t;
  t.columns = {"lambda", "weighted_sum"};
  bool finite = std::isfinite(spec.site_sum());
  for (double l : lambdas) {
    const double v = spec.weighted_sum(l);
    finite = finite && std::isfinite(v);
    t.add({l, v});
  }
  r.tables["decay"] = t;
  r.pass = finite;
  r.verdict = finite ? "finite" : "infinite";
  return r;
}

Mat heisenberg_evolve(const InteractionSpec& spec, int length, Boundary bc, double t, const Mat& a_full) {
  const Mat h = local_hamiltonian(spec, length, bc);
  if (a_full.rows() != h.rows()) throw ShapeError("heisenberg_evolve: observable size");
  const Mat u = unitary_from_hermitian(h, -t);
  return u * a_full * u.adjoint();
}

Mat heisenberg_evolve_expm(const InteractionSpec& spec, int length, Boundary bc, double t, const Mat& a_full) {
  const Mat h = local_hamiltonian(spec, length, bc);
  const Mat u = expm(Mat(kI * t * h));
  return u * a_full * u.adjoint();
}

SoftSystem spin_system(const std::vector<int>& lengths) {
  if (lengths.size() < 3) throw Error("spin system: need at least 3 cube lengths");
  std::vector<double> labels;
  std::vector<LevelSpace> levels;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    check_length(lengths[i]);
    if (lengths[i] % 2 != 0) throw Error("spin system: cube lengths must be even");
    if (i > 0 && lengths[i] <= lengths[i - 1]) throw Error("spin system: lengths must increase");
    labels.push_back(lengths[i]);
    levels.push_back(LevelSpace::matrices(dim_of(lengths[i]), NormKind::op, true));
  }
  std::vector<ConnectingMap> steps;
  for (std::size_t i = 0; i + 1 < lengths.size(); ++i) {
    const Eigen::Index pad = dim_of((lengths[i + 1] - lengths[i]) / 2);
    steps.emplace_back([pad](const Mat& a) { return kron(identity(pad), kron(a, identity(pad))); }, levels[i],
                       levels[i + 1]);
  }
  SoftSystem s = SoftSystem::from_steps(ScaleChain(labels), levels, steps);
  s.name = "spin-chain";
  return s;
}

ElementNet local_net(const std::vector<int>& lengths, const Mat& a, int first) {
  ElementNet net;
  for (int l : lengths) net.entries.push_back(embed_block(a, first, l));
  return net;
}

semigroup::GeneratorNet derivation_generator(const InteractionSpec& spec, const std::vector<int>& lengths,
                                             Boundary bc) {
  semigroup::GeneratorNet g;
  g.dissipative = true;
  for (int l : lengths) {
    const Eigen::SparseMatrix<cplx> h = local_hamiltonian(spec, l, bc).sparseView();
    const double bound = 2.0 * operator_norm(Mat(h));
    g.ops.push_back(semigroup::LevelOperator::from_function(
        [h](const Mat& x) -> Mat {
          const Mat hx = h * x;
          const Mat xh = (h.adjoint() * x.adjoint()).adjoint();
          return kI * (hx - xh);
        },
        bound));
  }
  return g;
}

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool all_tiny(const std::vector<double>& v, double tol = 1e-14) {
  for (double x : v)
    if (x > tol) return false;
  return true;
}

}  // namespace

Report boundary_defect(const InteractionSpec& spec, const Mat& a, int first, double t,
                       const std::vector<int>& lengths, const std::vector<Boundary>& bcs) {
  Report r;
  r.name = "boundary_defect";
  const SoftSystem sys = spin_system(lengths);
  std::vector<ElementNet> nets(bcs.size());
  double oracle_gap = 0.0;
  for (int l : lengths) {
    const Mat af = embed_block(a, first, l);
    for (std::size_t b = 0; b < bcs.size(); ++b) {
      const Mat ev = heisenberg_evolve(spec, l, bcs[b], t, af);
      const Mat oracle = heisenberg_evolve_expm(spec, l, bcs[b], t, af);
      oracle_gap = std::max(oracle_gap, max_abs(ev - oracle));
      nets[b].entries.push_back(ev);
    }
  }
  r.values["oracle_gap"] = oracle_gap;
  bool ok = oracle_gap <= 1e-10;
  std::size_t open = bcs.size();
  for (std::size_t b = 0; b < bcs.size(); ++b)
    if (bcs[b] == Boundary::open) open = b;
  Table tab;
  tab.columns = {"L", "bc", "defect_vs_open"};
  if (open < bcs.size()) {
    for (std::size_t b = 0; b < bcs.size(); ++b) {
      if (b == open) continue;
      std::vector<double> trail;
      for (std::size_t i = 0; i < lengths.size(); ++i) {
        const double d = operator_norm(Mat(nets[b][i] - nets[open][i]));
        trail.push_back(d);
        tab.add({double(lengths[i]), double(static_cast<int>(bcs[b])), d});
      }
      const bool dec = strictly_decreasing(trail) || all_tiny(trail);
      r.notes["trail_" + to_string(bcs[b])] = dec ? "decreasing" : "not-decreasing";
      ok = ok && dec;
    }
  }
  r.tables["defect"] = tab;
  for (std::size_t b = 0; b < bcs.size(); ++b) {
    const ConvergenceReport cr = jconvergence_diagnostic(sys, nets[b], kTrendTol);
    Report child = cr.to_report("jconvergence_" + to_string(bcs[b]));
    const bool dec = strictly_decreasing(cr.dhat) || all_tiny(cr.dhat);
    child.notes["dhat_trend"] = dec ? "decreasing" : "not-decreasing";
    ok = ok && dec && cr.verdict != Verdict::divergent;
    r.children.push_back(child);
  }
  r.pass = ok;
  r.verdict = ok ? "pass" : "fail";
  return r;
}

Mat single_site_observable(const std::string& name) {
  if (name == "x") return pauli_x();
  if (name == "y") return pauli_y();
  if (name == "z") return pauli_z();
  throw Error("unknown observable: " + name + " (expected x, y or z)");
}

namespace {

Report bound_report(const InteractionSpec& spec, const std::vector<int>& lengths) {
  Report r;
  r.name = "derivation";
  Table t;
  t.columns = {"L", "block", "norm", "bound", "dense_gap", "stabilization_gap", "boundary_term_gap"};
  const std::vector<Mat> observables = {pauli_x(), pauli_y(), pauli_z(), kron(pauli_x(), pauli_z()),
                                        identity(2)};
  const int lmax = lengths.back();
  bool bound_ok = true, stable_ok = true, dense_ok = true, boundary_ok = true;
  for (std::size_t o = 0; o < observables.size(); ++o) {
    const Mat& a = observables[o];
    const int k = a.rows() == 2 ? 1 : 2;
    const Derivation top = derivation_apply(spec, a, 0, lmax);
    for (int l : lengths) {
      const Derivation d = derivation_apply(spec, a, 0, l);
      bound_ok = bound_ok && d.norm <= d.bound * (1.0 + 1e-12) + 1e-14;
      const Mat h = local_hamiltonian(spec, l, Boundary::open);
      const Mat af = embed_block(a, 0, l);
      const double dense_gap = max_abs(Mat(kI * commutator(h, af) - d.value));
      dense_ok = dense_ok && dense_gap < 1e-12;
      const Eigen::Index pad = dim_of((lmax - l) / 2);
      const Mat lifted = kron(identity(pad), kron(d.value, identity(pad)));
      const double stab = max_abs(Mat(lifted - top.value));
      if (l >= k + 2 * spec.range() + 2) stable_ok = stable_ok && stab == 0.0;
      double bgap = 0.0;
      for (Boundary bc : {Boundary::periodic, Boundary::antiperiodic})
        bgap = std::max(bgap, max_abs(commutator(boundary_term(spec, l, bc), af)));
      if (l >= k + 2 * spec.range() + 2) boundary_ok = boundary_ok && bgap == 0.0;
      t.add({double(l), double(o), d.norm, d.bound, dense_gap, stab, bgap});
    }
  }
  r.tables["derivation"] = t;
  r.notes["bound"] = bound_ok ? "holds" : "violated";
  r.notes["stabilization"] = stable_ok ? "exact" : "inexact";
  r.notes["dense_commutator"] = dense_ok ? "agrees" : "disagrees";
  r.notes["boundary_terms"] = boundary_ok ? "vanish" : "nonzero";
  r.pass = bound_ok && stable_ok && dense_ok && boundary_ok;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report radius_report(const InteractionSpec& spec, const std::vector<int>& lengths, const Mat& a, int k_max) {
  Report r;
  r.name = "analytic_radius";
  Table t;
  t.columns = {"L", "radius"};
  const double p = spec.site_sum();
  const double lower = 1.0 / (2.0 * p * std::max(1, 2 * spec.range()));
  const auto gen = derivation_generator(spec, lengths, Boundary::open);
  double min_radius = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    Mat y = embed_block(a, 0, lengths[i]);
    std::vector<double> logs = {std::log(operator_norm(y))};
    double qmax = 0.0;
    for (int k = 0; k < k_max; ++k) {
      y = gen[i].apply(y);
      const double s = operator_norm(y);
      if (s == 0.0) {
        qmax = 0.0;
        break;
      }
      logs.push_back(std::log(s));
      const double q = std::exp(logs[k + 1] - logs[k]) / (k + 1);
      qmax = std::max(qmax, q);
    }
    const double radius = qmax > 0.0 ? 1.0 / qmax : std::numeric_limits<double>::infinity();
    min_radius = std::min(min_radius, radius);
    t.add({double(lengths[i]), radius});
  }
  r.tables["radius"] = t;
  r.values["min_radius"] = min_radius;
  r.values["lower_bound"] = lower;
  r.pass = min_radius >= lower;
  r.verdict = r.pass ? "bounded-below" : "not-bounded";
  return r;
}

}  // namespace

Report spin_chain_experiment(const ExperimentConfig& config) {
  for (int l : config.lengths) check_length(l);
  const InteractionSpec spec = InteractionSpec::ising(config.coupling, config.field);
  const Mat a = single_site_observable(config.observable);
  Report r;
  r.name = "spin_chain";
  r.children.push_back(decay_profile(spec, {0.0, 0.5, 1.0}));
  r.children.push_back(bound_report(spec, config.lengths));
  for (double t : config.t_grid) {
    Report b = boundary_defect(spec, a, 0, t, config.lengths, config.bcs);
    b.name = "boundary_defect_t" + format_double(t);
    r.children.push_back(b);
  }
  r.children.push_back(radius_report(spec, config.lengths, a, config.k_max));
  const SoftSystem sys = spin_system(config.lengths);
  std::vector<LevelProbe> probes = {{0, embed_block(a, 0, config.lengths[0])}};
  r.children.push_back(soft_transitivity_defect(sys, probes, kExactTol));
  r.pass = r.children_pass();
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

}  // namespace limitflow::spin
