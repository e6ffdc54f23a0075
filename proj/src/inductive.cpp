#include "limitflow/inductive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "limitflow/rng.hpp"

namespace limitflow {

ScaleChain::ScaleChain(std::vector<double> labels, Direction direction)
    : labels_(std::move(labels)), direction_(direction) {
  if (labels_.size() < 3) throw Error("scale chain needs at least 3 labels");
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    bool ordered = direction_ == Direction::increasing ? labels_[i] > labels_[i - 1]
                                                       : labels_[i] < labels_[i - 1];
    if (!ordered) throw Error("scale chain labels not strictly ordered toward the limit");
  }
  if (direction_ == Direction::toward_zero && labels_.back() <= 0.0)
    throw Error("a chain directed toward zero needs positive labels");
}

ScaleChain ScaleChain::integers(int first, int last) {
  std::vector<double> labels;
  for (int i = first; i <= last; ++i) labels.push_back(i);
  return ScaleChain(std::move(labels));
}

std::size_t ScaleChain::index_of(double label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  std::ostringstream os;
  os << "label " << label << " not in chain";
  throw ShapeError(os.str());
}

bool ScaleChain::operator==(const ScaleChain& other) const {
  return labels_ == other.labels_ && direction_ == other.direction_;
}

LevelSpace LevelSpace::vectors(Eigen::Index dim, NormKind norm) {
  if (dim <= 0) throw ShapeError("level dimension must be positive");
  return LevelSpace{dim, 1, norm, false};
}

LevelSpace LevelSpace::matrices(Eigen::Index n, NormKind norm, bool algebra) {
  if (n <= 0) throw ShapeError("level dimension must be positive");
  return LevelSpace{n, n, norm, algebra};
}

Mat LevelSpace::unit() const {
  if (!algebra) throw Unsupported("level has no algebra structure");
  return Mat::Identity(rows, cols);
}

double LevelSpace::dual_norm_of(const Mat& f) const {
  switch (norm) {
    case NormKind::hilbert: return f.norm();
    case NormKind::trace: return operator_norm(f);
    case NormKind::op: return trace_norm(f);
    case NormKind::grid_sup: return f.cwiseAbs().sum();
    case NormKind::grid_l1: return max_abs(f);
  }
  return 0.0;
}

void LevelSpace::check(const Mat& x, const std::string& where) const {
  if (x.rows() != rows || x.cols() != cols) {
    std::ostringstream os;
    os << where << ": element shape " << x.rows() << "x" << x.cols() << " does not match level "
       << rows << "x" << cols;
    throw ShapeError(os.str());
  }
}

ConnectingMap::ConnectingMap(Action action, LevelSpace source, LevelSpace target)
    : action_(std::move(action)), source_(source), target_(target) {}

ConnectingMap ConnectingMap::identity(const LevelSpace& level) {
  ConnectingMap m([](const Mat& x) { return x; }, level, level);
  m.identity_ = true;
  return m;
}

ConnectingMap ConnectingMap::zero(const LevelSpace& source, const LevelSpace& target) {
  ConnectingMap m([target](const Mat&) { return target.zero(); }, source, target);
  m.zero_ = true;
  return m;
}

ConnectingMap ConnectingMap::from_matrix(const Mat& mat, const LevelSpace& source,
                                         const LevelSpace& target) {
  if (mat.rows() != target.dim() || mat.cols() != source.dim())
    throw ShapeError("connecting matrix shape does not match levels");
  return ConnectingMap(
      [mat, target](const Mat& x) {
        return unvectorize(mat * vectorize(x), target.rows, target.cols);
      },
      source, target);
}

ConnectingMap ConnectingMap::then(const ConnectingMap& next) const {
  if (!(next.source_ == target_)) throw ShapeError("composition of incompatible maps");
  if (identity_) return next;
  if (next.identity_) return *this;
  if (zero_ || next.zero_) return zero(source_, next.target_);
  Action first = action_;
  Action second = next.action_;
  return ConnectingMap([first, second](const Mat& x) { return second(first(x)); }, source_,
                       next.target_);
}

Mat ConnectingMap::operator()(const Mat& x) const {
  source_.check(x, "connecting map");
  if (identity_) return x;
  if (zero_ || !action_) return target_.zero();
  return action_(x);
}

Mat ConnectingMap::dense(Eigen::Index cap) const {
  if (source_.dim() > cap || target_.dim() > cap)
    throw CapExceeded("dense connecting matrix above dimension cap");
  Mat out(target_.dim(), source_.dim());
  Mat e = source_.zero();
  for (Eigen::Index k = 0; k < source_.dim(); ++k) {
    e.setZero();
    e(k % source_.rows, k / source_.rows) = 1.0;
    out.col(k) = vectorize((*this)(e));
  }
  return out;
}

SoftSystem::SoftSystem(ScaleChain chain, std::vector<LevelSpace> levels, bool strict)
    : chain_(std::move(chain)), levels_(std::move(levels)), strict_(strict) {
  if (levels_.size() != chain_.size()) throw ShapeError("one level per label required");
}

SoftSystem SoftSystem::from_steps(ScaleChain chain, std::vector<LevelSpace> levels,
                                  std::vector<ConnectingMap> steps) {
  SoftSystem s(std::move(chain), std::move(levels), true);
  const std::size_t k = s.size();
  if (steps.size() + 1 != k) throw ShapeError("need one step map per consecutive label pair");
  s.maps_.resize(k * (k + 1) / 2);
  for (std::size_t n = 0; n < k; ++n) {
    s.maps_[s.slot(n, n)] = ConnectingMap::identity(s.levels_[n]);
    if (n == 0) continue;
    const auto& step = steps[n - 1];
    if (!(step.source() == s.levels_[n - 1]) || !(step.target() == s.levels_[n]))
      throw ShapeError("step map levels do not match the chain levels");
    for (std::size_t m = 0; m < n; ++m) s.maps_[s.slot(n, m)] = s.maps_[s.slot(n - 1, m)].then(step);
  }
  return s;
}

SoftSystem SoftSystem::from_rule(ScaleChain chain, std::vector<LevelSpace> levels, PairRule rule,
                                 bool strict) {
  SoftSystem s(std::move(chain), std::move(levels), strict);
  const std::size_t k = s.size();
  s.maps_.resize(k * (k + 1) / 2);
  for (std::size_t n = 0; n < k; ++n) {
    s.maps_[s.slot(n, n)] = ConnectingMap::identity(s.levels_[n]);
    for (std::size_t m = 0; m < n; ++m) {
      ConnectingMap j = rule(n, m);
      if (!(j.source() == s.levels_[m]) || !(j.target() == s.levels_[n]))
        throw ShapeError("rule map levels do not match the chain levels");
      s.maps_[s.slot(n, m)] = std::move(j);
    }
  }
  return s;
}

SoftSystem SoftSystem::constant(ScaleChain chain, LevelSpace level) {
  const std::size_t k = chain.size();
  std::vector<LevelSpace> levels(k, level);
  std::vector<ConnectingMap> steps(k - 1, ConnectingMap::identity(level));
  SoftSystem s = from_steps(std::move(chain), std::move(levels), std::move(steps));
  s.name = "constant";
  return s;
}

const ConnectingMap& SoftSystem::map(std::size_t n, std::size_t m) const {
  if (n >= size() || m >= size()) throw ShapeError("level index out of range");
  if (n < m) throw ShapeError("j_nm requested with n below m; it is the zero map");
  return maps_[slot(n, m)];
}

Mat SoftSystem::apply(std::size_t n, std::size_t m, const Mat& x) const {
  if (n < m) {
    levels_.at(m).check(x, "apply");
    return levels_.at(n).zero();
  }
  return map(n, m)(x);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::convergent: return "convergent";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::divergent: return "divergent";
  }
  return "unknown";
}

void check_net(const SoftSystem& system, const ElementNet& net) {
  if (net.size() != system.size()) throw ShapeError("net length does not match the chain");
  for (std::size_t i = 0; i < net.size(); ++i) system.level(i).check(net[i], "net entry");
}

double uniform_bound(const SoftSystem& system, const ElementNet& net) {
  check_net(system, net);
  double b = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) b = std::max(b, system.level(i).norm_of(net[i]));
  return b;
}

Verdict tail_verdict(const std::vector<double>& dhat, double tol) {
  if (dhat.empty()) return Verdict::inconclusive;
  const std::size_t k = dhat.size();
  const std::size_t w = std::min<std::size_t>(3, k);
  const double last = dhat.back();
  bool nonincreasing = true;
  bool strictly_decreasing = true;
  for (std::size_t i = k - w + 1; i < k; ++i) {
    const double slack = 1e-12 * std::max(dhat[i - 1], 1e-300);
    if (dhat[i] > dhat[i - 1] + slack) nonincreasing = false;
    if (!(dhat[i] < dhat[i - 1])) strictly_decreasing = false;
  }
  if (last < tol && nonincreasing) return Verdict::convergent;
  if (last >= tol && !strictly_decreasing) return Verdict::divergent;
  return Verdict::inconclusive;
}

ElementNet zero_net(const SoftSystem& system) {
  ElementNet net;
  for (std::size_t i = 0; i < system.size(); ++i) net.entries.push_back(system.level(i).zero());
  return net;
}

ElementNet make_basic_net_at(const SoftSystem& system, std::size_t m, const Mat& x) {
  if (m >= system.size()) throw ShapeError("level index out of range");
  system.level(m).check(x, "make_basic_net");
  ElementNet net = zero_net(system);
  for (std::size_t n = m; n < system.size(); ++n) net[n] = system.map(n, m)(x);
  return net;
}

ElementNet make_basic_net(const SoftSystem& system, double m_label, const Mat& x) {
  return make_basic_net_at(system, system.chain().index_of(m_label), x);
}

ElementNet add(const ElementNet& a, const ElementNet& b, cplx beta) {
  if (a.size() != b.size()) throw ShapeError("net lengths differ");
  ElementNet out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols())
      throw ShapeError("net entries differ in shape");
    out[i] += beta * b[i];
  }
  return out;
}

ElementNet scale(const ElementNet& a, cplx s) {
  ElementNet out = a;
  for (auto& e : out.entries) e *= s;
  return out;
}

ElementNet map_net(const ElementNet& a, const std::function<Mat(std::size_t, const Mat&)>& f) {
  ElementNet out;
  out.entries.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.entries.push_back(f(i, a[i]));
  return out;
}

double seminorm_from(const SoftSystem& system, const ElementNet& net, std::size_t start) {
  check_net(system, net);
  if (start >= net.size()) throw Error("seminorm: empty tail");
  double s = 0.0;
  for (std::size_t n = start; n < net.size(); ++n) s = std::max(s, system.level(n).norm_of(net[n]));
  return s;
}

double seminorm(const SoftSystem& system, const ElementNet& net, double tail_start) {
  return seminorm_from(system, net, system.chain().index_of(tail_start));
}

double tail_seminorm(const SoftSystem& system, const ElementNet& net) {
  const std::size_t k = system.size();
  return seminorm_from(system, net, k >= 3 ? k - 3 : 0);
}

ConvergenceReport jconvergence_diagnostic(const SoftSystem& system, const ElementNet& net,
                                          double tol) {
  check_net(system, net);
  const std::size_t k = system.size();
  ConvergenceReport r;
  r.labels = system.chain().labels();
  r.tolerance = tol;
  r.dhat.assign(k - 1, 0.0);
  for (std::size_t m = 0; m + 1 < k; ++m) {
    for (std::size_t n = m + 1; n < k; ++n) {
      const double d = system.level(n).norm_of(net[n] - system.map(n, m)(net[m]));
      r.defect.push_back({system.chain().label(m), system.chain().label(n), d});
      r.dhat[m] = std::max(r.dhat[m], d);
    }
  }
  for (std::size_t n = 0; n < k; ++n) r.norm_trail.push_back(system.level(n).norm_of(net[n]));
  r.uniform_bound = *std::max_element(r.norm_trail.begin(), r.norm_trail.end());
  r.seminorm_estimate = tail_seminorm(system, net);
  r.verdict = tail_verdict(r.dhat, tol);
  return r;
}

json ConvergenceReport::to_json() const {
  json j;
  j["labels"] = labels;
  json d = json::array();
  for (const auto& e : defect) d.push_back({{"m", e.m}, {"n", e.n}, {"value", e.value}});
  j["defect"] = d;
  j["dhat"] = dhat;
  j["norm_trail"] = norm_trail;
  j["seminorm_estimate"] = seminorm_estimate;
  j["uniform_bound"] = uniform_bound;
  j["verdict"] = to_string(verdict);
  j["tolerances"] = {{"trend", tolerance}};
  return j;
}

std::string ConvergenceReport::to_csv() const {
  Table t;
  t.columns = {"m", "n", "value"};
  for (const auto& e : defect) t.add({e.m, e.n, e.value});
  return t.to_csv();
}

Report ConvergenceReport::to_report(const std::string& name) const {
  Report r;
  r.name = name;
  r.pass = verdict == Verdict::convergent;
  r.verdict = to_string(verdict);
  r.values["seminorm_estimate"] = seminorm_estimate;
  r.values["uniform_bound"] = uniform_bound;
  r.values["tolerance"] = tolerance;
  r.values["dhat_last"] = dhat.empty() ? 0.0 : dhat.back();
  Table d;
  d.columns = {"m", "n", "value"};
  for (const auto& e : defect) d.add({e.m, e.n, e.value});
  r.tables["defect"] = d;
  Table p;
  p.columns = {"m", "dhat"};
  for (std::size_t i = 0; i < dhat.size(); ++i) p.add({labels[i], dhat[i]});
  r.tables["profile"] = p;
  Table nt;
  nt.columns = {"n", "norm"};
  for (std::size_t i = 0; i < norm_trail.size(); ++i) nt.add({labels[i], norm_trail[i]});
  r.tables["norm_trail"] = nt;
  return r;
}

LimitModel LimitModel::final_level(const SoftSystem& system) {
  LimitModel model;
  model.space = system.level(system.size() - 1);
  model.limit_of = [](const ElementNet& net) { return net.entries.back(); };
  model.lift = [system](const Mat& y) { return make_basic_net_at(system, 0, y); };
  return model;
}

namespace {

double row_tail_slack(double v) { return 1e-12 * std::max(1.0, std::abs(v)) + 1e-15; }

}  // namespace

Report soft_transitivity_defect(const SoftSystem& system, const std::vector<LevelProbe>& probes,
                                double tol) {
  Report r;
  r.name = "soft_transitivity";
  Table t;
  t.columns = {"probe", "l", "m", "n", "defect"};
  const std::size_t k = system.size();
  bool pass = true;
  double max_defect = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& probe = probes[p];
    system.level(probe.level).check(probe.x, "soft_transitivity probe");
    double row_min = std::numeric_limits<double>::infinity();
    double tail = -1.0;
    for (std::size_t m = probe.level + 1; m < k; ++m) {
      const Mat jml = system.map(m, probe.level)(probe.x);
      for (std::size_t n = m + 1; n < k; ++n) {
        const Mat direct = system.map(n, probe.level)(probe.x);
        const Mat via = system.map(n, m)(jml);
        const double d = system.level(n).norm_of(direct - via);
        t.add({double(p), system.chain().label(probe.level), system.chain().label(m),
               system.chain().label(n), d});
        row_min = std::min(row_min, d);
        max_defect = std::max(max_defect, d);
        if (m == k - 2 && n == k - 1) tail = d;
      }
    }
    if (tail >= 0.0 && tail > row_min + row_tail_slack(row_min) && tail > tol) pass = false;
  }
  r.tables["defect"] = t;
  r.values["max_defect"] = max_defect;
  r.values["tolerance"] = tol;
  r.pass = pass;
  r.verdict = pass ? (max_defect <= tol ? "exact" : "tail-minimal") : "tail-not-minimal";
  return r;
}

Report asymptotic_isometry_defect(const SoftSystem& system, double tol, int probe_count,
                                  std::uint64_t seed) {
  Report r;
  r.name = "asymptotic_isometry";
  Table t;
  t.columns = {"n", "m", "lambda"};
  const std::size_t k = system.size();
  std::vector<std::vector<double>> lambda(k, std::vector<double>(k, 1.0));
  double worst_gap = 0.0;
  for (std::size_t m = 0; m + 1 < k; ++m) {
    const LevelSpace& src = system.level(m);
    std::vector<Mat> sphere;
    if (src.norm == NormKind::grid_sup || src.norm == NormKind::grid_l1 ||
        system.level(m + 1).norm == NormKind::grid_sup || system.level(m + 1).norm == NormKind::grid_l1)
      throw Unsupported("asymptotic isometry: no minimizer for grid norms");
    if (src.norm != NormKind::hilbert) {
      CounterRng rng(seed, m);
      for (int i = 0; i < probe_count; ++i) {
        Mat x = rng.complex_gaussian(src.rows, src.cols);
        sphere.push_back(x / src.norm_of(x));
      }
    }
    for (std::size_t n = m + 1; n < k; ++n) {
      const ConnectingMap& j = system.map(n, m);
      double lam;
      if (src.norm == NormKind::hilbert && system.level(n).norm == NormKind::hilbert) {
        const Mat d = j.dense();
        if (d.rows() < d.cols()) {
          lam = 0.0;
        } else {
          Eigen::JacobiSVD<Mat> svd(d);
          lam = svd.singularValues()(svd.singularValues().size() - 1);
        }
      } else {
        lam = std::numeric_limits<double>::infinity();
        for (const auto& x : sphere) lam = std::min(lam, system.level(n).norm_of(j(x)));
      }
      lambda[n][m] = lam;
      worst_gap = std::max(worst_gap, std::abs(1.0 - lam));
      t.add({system.chain().label(n), system.chain().label(m), lam});
    }
  }
  bool column_ok = true;
  for (std::size_t m = 1; m + 1 < k; ++m)
    if (lambda[k - 1][m] + 1e-12 < lambda[k - 1][m - 1]) column_ok = false;
  bool chain_ok = true;
  for (std::size_t n = std::max<std::size_t>(2, k >= 3 ? k - 2 : 2); n < k; ++n)
    if (lambda[n][n - 1] + 1e-12 < lambda[n - 1][n - 2]) chain_ok = false;
  const double tail_lambda = lambda[k - 1][k - 2];
  r.values["tail_lambda"] = tail_lambda;
  r.values["max_gap"] = worst_gap;
  r.values["tolerance"] = tol;
  r.tables["lambda"] = t;
  const bool near_one = std::abs(1.0 - tail_lambda) <= tol;
  r.pass = tail_lambda > 0.0 && (near_one || (column_ok && chain_ok));
  r.verdict = worst_gap <= 1e-12 ? "isometric" : (r.pass ? "asymptotically-isometric" : "not-isometric");
  return r;
}

cplx pair(const Mat& x, const Mat& phi) {
  if (x.rows() != phi.rows() || x.cols() != phi.cols()) throw ShapeError("pairing shape mismatch");
  return (x.array() * phi.array()).sum();
}

Report jstar_diagnostic(const SoftSystem& system, const FunctionalNet& fnet,
                        const std::vector<ElementNet>& probe_nets, double tol) {
  const std::size_t k = system.size();
  if (fnet.covectors.size() != k) throw ShapeError("functional net length does not match chain");
  for (std::size_t i = 0; i < k; ++i) system.level(i).check(fnet.covectors[i], "functional net");
  Report r;
  r.name = "jstar";
  double fbound = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    fbound = std::max(fbound, system.level(i).dual_norm_of(fnet.covectors[i]));
  r.values["uniform_bound"] = fbound;

  Table trail;
  trail.columns = {"probe", "n", "re", "im"};
  double worst_spread = 0.0;
  for (std::size_t p = 0; p < probe_nets.size(); ++p) {
    const auto rep = jconvergence_diagnostic(system, probe_nets[p], tol);
    if (!rep.convergent()) {
      std::ostringstream os;
      os << "jstar diagnostic refused: probe " << p << " is " << to_string(rep.verdict)
         << " (last D^ = " << (rep.dhat.empty() ? 0.0 : rep.dhat.back()) << ")";
      throw Refused(os.str());
    }
    std::vector<cplx> values;
    for (std::size_t n = 0; n < k; ++n) {
      values.push_back(pair(probe_nets[p][n], fnet.covectors[n]));
      trail.add({double(p), system.chain().label(n), values.back().real(), values.back().imag()});
    }
    for (std::size_t a = k - std::min<std::size_t>(3, k); a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        worst_spread = std::max(worst_spread, std::abs(values[a] - values[b]));
  }
  r.tables["trail"] = trail;
  r.values["trail_spread"] = worst_spread;

  Table wstar;
  wstar.columns = {"m", "spread"};
  double wstar_tail = 0.0;
  for (std::size_t m = 0; m + 1 < k; ++m) {
    const LevelSpace& lv = system.level(m);
    const Eigen::Index dim = lv.dim();
    const Eigen::Index count = std::min<Eigen::Index>(dim, 64);
    double spread = 0.0;
    for (Eigen::Index c = 0; c < count; ++c) {
      const Eigen::Index idx = (c * dim) / count;
      Mat e = lv.zero();
      e(idx % lv.rows, idx / lv.rows) = 1.0;
      std::vector<cplx> vals;
      for (std::size_t n = std::max(m, k >= 3 ? k - 3 : 0); n < k; ++n)
        vals.push_back(pair(system.map(n, m)(e), fnet.covectors[n]));
      for (const auto& v : vals) spread = std::max(spread, std::abs(v - vals.back()));
    }
    wstar.add({system.chain().label(m), spread});
    if (m + 3 >= k) wstar_tail = std::max(wstar_tail, spread);
  }
  r.tables["wstar"] = wstar;
  r.values["wstar_tail_spread"] = wstar_tail;
  r.values["tolerance"] = tol;
  r.pass = worst_spread < tol && wstar_tail < tol;
  r.verdict = r.pass ? "jstar-convergent" : "not-cauchy";
  return r;
}

namespace {

void require_algebra(const SoftSystem& system) {
  for (std::size_t i = 0; i < system.size(); ++i)
    if (!system.level(i).algebra) throw Unsupported("level without algebra structure");
}

}  // namespace

ElementNet net_product(const SoftSystem& system, const ElementNet& a, const ElementNet& b) {
  require_algebra(system);
  check_net(system, a);
  check_net(system, b);
  ElementNet out;
  for (std::size_t i = 0; i < a.size(); ++i) out.entries.push_back(a[i] * b[i]);
  return out;
}

ElementNet net_adjoint(const SoftSystem& system, const ElementNet& a) {
  require_algebra(system);
  check_net(system, a);
  ElementNet out;
  for (const auto& e : a.entries) out.entries.push_back(e.adjoint());
  return out;
}

Report multiplicativity_defect(const SoftSystem& system, const std::vector<ProductProbe>& probes,
                               double tol) {
  require_algebra(system);
  Report r;
  r.name = "multiplicativity";
  Table t;
  t.columns = {"probe", "l", "m", "n", "defect"};
  const std::size_t k = system.size();
  bool pass = true;
  double max_defect = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& probe = probes[p];
    system.level(probe.level).check(probe.a, "multiplicativity probe");
    system.level(probe.level).check(probe.b, "multiplicativity probe");
    double row_min = std::numeric_limits<double>::infinity();
    double tail = -1.0;
    for (std::size_t m = probe.level; m < k; ++m) {
      const Mat am = system.map(m, probe.level)(probe.a);
      const Mat bm = system.map(m, probe.level)(probe.b);
      const Mat prod = am * bm;
      for (std::size_t n = m + 1; n < k; ++n) {
        const Mat an = system.map(n, probe.level)(probe.a);
        const Mat bn = system.map(n, probe.level)(probe.b);
        const double d = system.level(n).norm_of(system.map(n, m)(prod) - an * bn);
        t.add({double(p), system.chain().label(probe.level), system.chain().label(m),
               system.chain().label(n), d});
        row_min = std::min(row_min, d);
        max_defect = std::max(max_defect, d);
        if (m == k - 2 && n == k - 1) tail = d;
      }
    }
    if (tail >= 0.0 && tail > row_min + row_tail_slack(row_min) && tail > tol) pass = false;
  }
  r.tables["defect"] = t;
  r.values["max_defect"] = max_defect;
  r.values["tolerance"] = tol;
  r.pass = pass;
  r.verdict = pass ? (max_defect <= tol ? "exact" : "tail-minimal") : "tail-not-minimal";
  return r;
}

namespace {

std::vector<cplx> spectrum(const Mat& a) {
  std::vector<cplx> out;
  if (is_hermitian(a, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.emplace_back(es.eigenvalues()(i), 0.0);
  } else {
    Eigen::ComplexEigenSolver<Mat> es(a, false);
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back(es.eigenvalues()(i));
  }
  std::sort(out.begin(), out.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

Mat polynomial_of(const Mat& a, const std::vector<cplx>& coeffs) {
  Mat acc = Mat::Zero(a.rows(), a.cols());
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
    acc = acc * a + (*it) * Mat::Identity(a.rows(), a.cols());
  return acc;
}

}  // namespace

Report algebra_diagnostics(const SoftSystem& system, const ElementNet& net, double tol,
                           const std::vector<cplx>& polynomial) {
  require_algebra(system);
  check_net(system, net);
  for (const auto& e : net.entries)
    if (e.rows() != e.cols()) throw ShapeError("algebra diagnostics need square entries");
  Report r;
  r.name = "algebra";
  const std::size_t k = net.size();
  Table spec;
  spec.columns = {"n", "re", "im"};
  std::vector<std::vector<cplx>> spectra;
  for (std::size_t n = 0; n < k; ++n) {
    spectra.push_back(spectrum(net[n]));
    for (const auto& z : spectra.back()) spec.add({system.chain().label(n), z.real(), z.imag()});
  }
  r.tables["spectra"] = spec;

  double gap = 0.0;
  for (const auto& z : spectra.back()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n + 1 < k; ++n)
      for (const auto& w : spectra[n]) best = std::min(best, std::abs(z - w));
    gap = std::max(gap, best);
  }
  r.values["envelope_gap"] = gap;

  bool hermitian = true;
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t n = (k >= 3 ? k - 3 : 0); n < k; ++n) {
    if (!is_hermitian(net[n], 1e-10)) hermitian = false;
    for (const auto& z : spectra[n]) min_eig = std::min(min_eig, z.real());
  }
  r.values["tail_min_eigenvalue"] = hermitian ? min_eig : std::numeric_limits<double>::quiet_NaN();
  r.notes["positive"] = hermitian && min_eig >= -tol ? "yes" : "no";

  bool pass = gap <= tol;
  if (!polynomial.empty()) {
    ElementNet fnet = map_net(net, [&](std::size_t, const Mat& a) { return polynomial_of(a, polynomial); });
    const auto base = jconvergence_diagnostic(system, net, tol);
    const auto frep = jconvergence_diagnostic(system, fnet, tol);
    r.children.push_back(frep.to_report("polynomial_net"));
    r.values["polynomial_last_defect"] =
        system.level(k - 1).norm_of(fnet[k - 1] - polynomial_of(net[k - 1], polynomial));
    if (base.convergent() && !frep.convergent()) pass = false;
  }
  r.values["tolerance"] = tol;
  r.pass = pass;
  r.verdict = pass ? "envelope-ok" : "envelope-violated";
  return r;
}

SoftSystem split_system(ScaleChain chain, std::vector<LevelSpace> levels, LevelSpace limit_space,
                        std::vector<ConnectingMap> i_maps, std::vector<ConnectingMap> p_maps,
                        const std::vector<Mat>& limit_probes, double tol) {
  const std::size_t k = chain.size();
  if (i_maps.size() != k || p_maps.size() != k || levels.size() != k)
    throw ShapeError("split system needs one level, i-map and p-map per label");
  std::ostringstream table;
  bool refused = false;
  for (std::size_t p = 0; p < limit_probes.size(); ++p) {
    limit_space.check(limit_probes[p], "split probe");
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < k; ++n) {
      const double d = limit_space.norm_of(i_maps[n](p_maps[n](limit_probes[p])) - limit_probes[p]);
      table << "probe " << p << " label " << chain.label(n) << " defect " << d << "\n";
      if (d > prev + 1e-12 * std::max(1.0, prev) && d > tol) refused = true;
      prev = d;
    }
  }
  if (refused) throw Refused("split system refused: i o p defect not decreasing\n" + table.str());
  auto rule = [i_maps, p_maps](std::size_t n, std::size_t m) { return i_maps[m].then(p_maps[n]); };
  SoftSystem s = SoftSystem::from_rule(std::move(chain), std::move(levels), rule, false);
  s.name = "split";
  return s;
}

Mat tensor_element(const Mat& x, const Mat& y) { return kron(x, y); }

namespace {

ConnectingMap tensor_map(const ConnectingMap& j, const ConnectingMap& k, const LevelSpace& src,
                         const LevelSpace& dst) {
  if (j.is_identity() && k.is_identity()) return ConnectingMap::identity(src);
  const LevelSpace bs = k.source();
  const LevelSpace as = j.source();
  std::vector<Mat> k_images;
  for (Eigen::Index c = 0; c < bs.cols; ++c)
    for (Eigen::Index r = 0; r < bs.rows; ++r) {
      Mat e = bs.zero();
      e(r, c) = 1.0;
      k_images.push_back(k(e));
    }
  return ConnectingMap(
      [j, as, bs, dst, k_images](const Mat& x) {
        Mat out = dst.zero();
        Mat block(as.rows, as.cols);
        std::size_t idx = 0;
        for (Eigen::Index c = 0; c < bs.cols; ++c)
          for (Eigen::Index r = 0; r < bs.rows; ++r, ++idx) {
            for (Eigen::Index i = 0; i < as.rows; ++i)
              for (Eigen::Index jj = 0; jj < as.cols; ++jj) block(i, jj) = x(i * bs.rows + r, jj * bs.cols + c);
            if (block.cwiseAbs().maxCoeff() == 0.0) continue;
            out += kron(j(block), k_images[idx]);
          }
        return out;
      },
      src, dst);
}

}  // namespace

SoftSystem tensor_system(const SoftSystem& a, const SoftSystem& b) {
  if (!(a.chain() == b.chain())) throw ShapeError("tensor system: chain mismatch");
  std::vector<LevelSpace> levels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& la = a.level(i);
    const auto& lb = b.level(i);
    if (la.norm != lb.norm) throw Unsupported("tensor system: levels with different norm kinds");
    levels.push_back(LevelSpace{la.rows * lb.rows, la.cols * lb.cols, la.norm, la.algebra && lb.algebra});
  }
  auto rule = [a, b, levels](std::size_t n, std::size_t m) {
    return tensor_map(a.map(n, m), b.map(n, m), levels[m], levels[n]);
  };
  SoftSystem s = SoftSystem::from_rule(a.chain(), levels, rule, a.strict() && b.strict());
  s.name = a.name + "(x)" + b.name;
  return s;
}

Report equivalent_maps_check(const SoftSystem& a, const SoftSystem& b,
                             const std::vector<LevelProbe>& probes,
                             const std::vector<ElementNet>& corpus, double tol) {
  if (!(a.chain() == b.chain())) throw ShapeError("equivalence check: chain mismatch");
  Report r;
  r.name = "equivalent_maps";
  Table t;
  t.columns = {"probe", "direction", "dhat_last"};
  bool cross_ok = true;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto ra = jconvergence_diagnostic(b, make_basic_net_at(a, probes[p].level, probes[p].x), tol);
    const auto rb = jconvergence_diagnostic(a, make_basic_net_at(b, probes[p].level, probes[p].x), tol);
    t.add({double(p), 0.0, ra.dhat.back()});
    t.add({double(p), 1.0, rb.dhat.back()});
    cross_ok = cross_ok && ra.convergent() && rb.convergent();
  }
  r.tables["cross_basic"] = t;
  Table v;
  v.columns = {"net", "verdict_a", "verdict_b"};
  bool agree = true;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto va = jconvergence_diagnostic(a, corpus[i], tol).verdict;
    const auto vb = jconvergence_diagnostic(b, corpus[i], tol).verdict;
    v.add({double(i), double(static_cast<int>(va)), double(static_cast<int>(vb))});
    if (cross_ok && va != vb) agree = false;
  }
  r.tables["verdicts"] = v;
  r.notes["cross_basic"] = cross_ok ? "pass" : "fail";
  r.pass = cross_ok && agree;
  r.verdict = !cross_ok ? "not-equivalent" : (agree ? "equivalent" : "verdict-disagreement");
  return r;
}

}  // namespace limitflow
