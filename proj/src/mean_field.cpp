#include "limitflow/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace limitflow::mean_field {

namespace {

Eigen::Index ipow(int d, int n) {
  Eigen::Index r = 1;
  for (int i = 0; i < n; ++i) r *= d;
  return r;
}

void check_sites(int n, const char* where) {
  if (n < 1) throw Error(std::string(where) + ": at least one site required");
  if (n > kMaxSites) {
    std::ostringstream os;
    os << where << ": " << n << " sites exceed the cap of " << kMaxSites;
    throw CapExceeded(os.str());
  }
}

// Digits of an index, site 0 most significant (matches kron ordering).
void digits(Eigen::Index idx, int n, int d, int* out) {
  for (int s = n - 1; s >= 0; --s) {
    out[s] = static_cast<int>(idx % d);
    idx /= d;
  }
}

std::vector<std::vector<int>> injections(int m, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::vector<bool> used(n, false);
  std::function<void()> rec = [&]() {
    if (static_cast<int>(cur.size()) == m) {
      out.push_back(cur);
      return;
    }
    for (int s = 0; s < n; ++s) {
      if (used[s]) continue;
      used[s] = true;
      cur.push_back(s);
      rec();
      cur.pop_back();
      used[s] = false;
    }
  };
  rec();
  return out;
}

}  // namespace

Mat symmetrize(int n, const Mat& a, int m, int d) {
  check_sites(n, "symmetrize");
  if (m < 1 || m > n) throw Error("symmetrize: need 1 <= M <= N");
  if (d < 2) throw Error("symmetrize: site dimension must be at least 2");
  const Eigen::Index dm = ipow(d, m);
  if (a.rows() != dm || a.cols() != dm) throw ShapeError("symmetrize: observable does not act on M sites");
  const auto inj = injections(m, n);
  const double weight = 1.0 / static_cast<double>(inj.size());
  const Eigen::Index dn = ipow(d, n);
  Mat out(dn, dn);
  // Entries depend only on the multiset of (row digit, column digit) pairs,
  // so each multiset is evaluated once, which makes the result exactly
  // permutation invariant.
  std::unordered_map<std::uint64_t, cplx> cache;
  std::vector<int> ri(n), ci(n), codes(n), rs(n), cs(n);
  for (Eigen::Index j = 0; j < dn; ++j) {
    digits(j, n, d, ci.data());
    for (Eigen::Index i = 0; i < dn; ++i) {
      digits(i, n, d, ri.data());
      for (int s = 0; s < n; ++s) codes[s] = ri[s] * d + ci[s];
      std::sort(codes.begin(), codes.end());
      std::uint64_t key = 0;
      for (int s = 0; s < n; ++s) key = key * static_cast<std::uint64_t>(d * d) + codes[s];
      auto it = cache.find(key);
      if (it == cache.end()) {
        for (int s = 0; s < n; ++s) {
          rs[s] = codes[s] / d;
          cs[s] = codes[s] % d;
        }
        cplx acc = 0.0;
        std::vector<bool> in(n);
        for (const auto& map : inj) {
          std::fill(in.begin(), in.end(), false);
          Eigen::Index r = 0, c = 0;
          for (int k = 0; k < m; ++k) {
            in[map[k]] = true;
            r = r * d + rs[map[k]];
            c = c * d + cs[map[k]];
          }
          bool diag = true;
          for (int s = 0; s < n && diag; ++s)
            if (!in[s] && rs[s] != cs[s]) diag = false;
          if (diag) acc += a(r, c);
        }
        it = cache.emplace(key, acc * weight).first;
      }
      out(i, j) = it->second;
    }
  }
  return out;
}

Mat permute_sites(const Mat& x, int n, const std::vector<int>& perm, int d) {
  const Eigen::Index dn = ipow(d, n);
  if (x.rows() != dn || x.cols() != dn) throw ShapeError("permute_sites: shape");
  if (static_cast<int>(perm.size()) != n) throw ShapeError("permute_sites: permutation length");
  std::vector<Eigen::Index> map(dn);
  std::vector<int> dig(n), pd(n);
  for (Eigen::Index i = 0; i < dn; ++i) {
    digits(i, n, d, dig.data());
    for (int s = 0; s < n; ++s) pd[perm[s]] = dig[s];
    Eigen::Index r = 0;
    for (int s = 0; s < n; ++s) r = r * d + pd[s];
    map[i] = r;
  }
  Mat out(dn, dn);
  for (Eigen::Index j = 0; j < dn; ++j)
    for (Eigen::Index i = 0; i < dn; ++i) out(map[i], map[j]) = x(i, j);
  return out;
}

Mat swap_sites(const Mat& x, int n, int i, int j, int d) {
  std::vector<int> perm(n);
  for (int s = 0; s < n; ++s) perm[s] = s;
  std::swap(perm[i], perm[j]);
  return permute_sites(x, n, perm, d);
}

Mat bloch_state(const std::array<double, 3>& r) {
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  if (len > 1.0 + 1e-12) throw Error("Bloch vector longer than 1");
  return 0.5 * (identity(2) + r[0] * pauli_x() + r[1] * pauli_y() + r[2] * pauli_z());
}

std::vector<std::array<double, 3>> bloch_grid() {
  std::vector<std::array<double, 3>> g;
  g.push_back({0.0, 0.0, 0.0});
  for (int axis = 0; axis < 3; ++axis)
    for (double s : {0.9, -0.9}) {
      std::array<double, 3> r{0.0, 0.0, 0.0};
      r[axis] = s;
      g.push_back(r);
    }
  const double h = 0.5 / std::sqrt(2.0);
  for (int axis = 0; axis < 3; ++axis)
    for (double s : {1.0, -1.0}) {
      std::array<double, 3> r{0.0, 0.0, 0.0};
      r[axis] = s * h;
      r[(axis + 1) % 3] = h;
      g.push_back(r);
    }
  return g;
}

Mat product_state(const Mat& sigma, int n) {
  Mat s = sigma;
  for (int i = 1; i < n; ++i) s = kron(s, sigma);
  return s;
}

cplx eval_product_state(const Mat& sigma, const Mat& a, int n) {
  const Mat s = product_state(sigma, n);
  if (a.rows() != s.rows() || a.cols() != s.cols()) throw ShapeError("eval_product_state: shape");
  return s.transpose().cwiseProduct(a).sum();
}

SoftSystem mean_field_system(int n_max, int d) {
  check_sites(n_max, "mean-field system");
  if (n_max < 3) throw Error("mean-field system: need at least 3 sizes");
  ScaleChain chain = ScaleChain::integers(1, n_max);
  std::vector<LevelSpace> levels;
  for (int n = 1; n <= n_max; ++n) levels.push_back(LevelSpace::matrices(ipow(d, n), NormKind::op, true));
  auto rule = [levels, d](std::size_t n, std::size_t m) {
    const int nn = static_cast<int>(n) + 1, mm = static_cast<int>(m) + 1;
    return ConnectingMap([nn, mm, d](const Mat& x) { return symmetrize(nn, x, mm, d); }, levels[m], levels[n]);
  };
  SoftSystem s = SoftSystem::from_rule(chain, levels, rule, true);
  s.name = "mean-field";
  return s;
}

Extrapolation extrapolate_inverse_n(const std::vector<int>& sizes, const std::vector<cplx>& values,
                                    int order) {
  if (sizes.size() != values.size() || static_cast<int>(sizes.size()) < order + 1)
    throw Error("extrapolation needs more sizes than fit parameters");
  const Eigen::Index k = static_cast<Eigen::Index>(sizes.size());
  Mat design(k, order + 1);
  Vec rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (int p = 0; p <= order; ++p) design(i, p) = std::pow(1.0 / sizes[i], p);
    rhs(i) = values[i];
  }
  const Vec coef = design.colPivHouseholderQr().solve(rhs);
  Extrapolation e;
  e.sizes = sizes;
  e.values = values;
  e.limit = coef(0);
  e.slope = coef(1);
  e.residual = (design * coef - rhs).cwiseAbs().maxCoeff();
  return e;
}

Extrapolation bracket_estimate(const Mat& a, const Mat& b, const Mat& sigma, const std::vector<int>& sizes) {
  std::vector<cplx> vals;
  for (int n : sizes) {
    if (n < 2) throw Error("bracket estimate: sizes must be at least 2");
    const Mat an = symmetrize(n, a, 1), bn = symmetrize(n, b, 1);
    vals.push_back(eval_product_state(sigma, kI * double(n) * commutator(an, bn), n));
  }
  return extrapolate_inverse_n(sizes, vals);
}

cplx mean_field_energy(const Mat& h, int r, const Mat& sigma) { return eval_product_state(sigma, h, r); }

Mat gradient_dH(const Mat& h, int r, const Mat& sigma) {
  if (r < 1 || r > 4) throw Error("gradient: interaction range must be 1..4 sites");
  const Eigen::Index d = sigma.rows();
  const Mat s = symmetrize(r, h, r, static_cast<int>(d));
  const Eigen::Index rest = s.rows() / d;
  const Mat env = r > 1 ? product_state(sigma, r - 1) : Mat::Identity(1, 1);
  Mat c = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx acc = 0.0;
      for (Eigen::Index k = 0; k < rest; ++k)
        for (Eigen::Index l = 0; l < rest; ++l) acc += s(i * rest + k, j * rest + l) * env(l, k);
      c(i, j) = acc;
    }
  const cplx energy = mean_field_energy(h, r, sigma);
  return double(r) * (c - energy * Mat::Identity(d, d));
}

Mat flip_apply(const Mat& x, int n, int d) {
  Mat out = Mat::Zero(x.rows(), x.cols());
  if (n < 2) return out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out += swap_sites(x, n, i, j, d) - x;
  return out * (2.0 / (n - 1));
}

Mat flip_generator(int n, int d) {
  if (n > kMaxFlipSites) {
    std::ostringstream os;
    os << "flip generator: " << n << " sites exceed the superoperator cap of " << kMaxFlipSites;
    throw CapExceeded(os.str());
  }
  const Eigen::Index dn = ipow(d, n);
  Mat out(dn * dn, dn * dn);
  Mat e = Mat::Zero(dn, dn);
  for (Eigen::Index c = 0; c < dn * dn; ++c) {
    e.setZero();
    e(c % dn, c / dn) = 1.0;
    out.col(c) = vectorize(flip_apply(e, n, d));
  }
  return out;
}

DecayFit fit_power_decay(const std::vector<int>& sizes, const std::vector<double>& values) {
  if (sizes.size() != values.size() || sizes.size() < 2) throw Error("decay fit needs at least two sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double x = std::log(double(sizes[i])), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  DecayFit f;
  f.exponent = -(k * sxy - sx * sy) / (k * sxx - sx * sx);
  f.doubling_ratio = std::pow(2.0, f.exponent);
  return f;
}

namespace {

double doubling_ratio(const std::vector<int>& sizes, const std::vector<double>& values, int n) {
  for (std::size_t i = 0; i < sizes.size(); ++i)
    for (std::size_t j = 0; j < sizes.size(); ++j)
      if (sizes[i] == n && sizes[j] == 2 * n) return values[i] / values[j];
  return std::numeric_limits<double>::quiet_NaN();
}

bool in_window(double v, double lo, double hi) { return v >= lo && v <= hi; }

}  // namespace

Report flip_limit_defect(const Mat& a, const Mat& b, const Mat& rho, const Mat& sigma,
                         const std::vector<int>& sizes, double t) {
  Report r;
  r.name = "flip";
  Table tab;
  tab.columns = {"N", "value", "limit", "defect", "bulk_residual", "local_dynamics"};
  const cplx sa = (sigma * a).trace(), sb = (sigma * b).trace(), ra = (rho * a).trace();
  const cplx limit = rho.trace() * sa * sb - ra * sb;
  const cplx limit_value = 2.0 * limit;
  std::vector<double> defects;
  std::vector<cplx> dyn;
  double bulk_max = 0.0;
  for (int n : sizes) {
    if (n < 2 || n > kMaxFlipSites) throw CapExceeded("flip defect: sizes must lie in 2..6");
    const Mat x = kron(a, symmetrize(n - 1, b, 1));
    const Mat state = kron(rho, product_state(sigma, n - 1));
    const cplx v = state.transpose().cwiseProduct(flip_apply(x, n)).sum();
    const double defect = std::abs(v - limit_value);
    defects.push_back(defect);
    const Mat bulk = symmetrize(n, kron(b, b), 2);
    const double bulk_res = max_abs(flip_apply(bulk, n));
    bulk_max = std::max(bulk_max, bulk_res);
    const Mat tagged = kron(a, identity(static_cast<Eigen::Index>(std::pow(2, n - 1))));
    const Mat evolved = expm_apply([n](const Mat& y) { return flip_apply(y, n); }, tagged, t, 2.0 * n);
    const cplx local = state.transpose().cwiseProduct(evolved).sum();
    dyn.push_back(local);
    tab.add({double(n), v.real(), limit_value.real(), defect, bulk_res, local.real()});
  }
  r.tables["flip"] = tab;
  const Mat x2 = kron(a, b);
  const Mat f = swap_sites(x2, 2, 0, 1);
  r.values["two_site_identity_gap"] = max_abs(flip_apply(x2, 2) - 2.0 * (f - x2));
  r.values["bulk_residual_max"] = bulk_max;
  const DecayFit fit = fit_power_decay(sizes, defects);
  r.values["fitted_exponent"] = fit.exponent;
  r.values["fitted_doubling_ratio"] = fit.doubling_ratio;
  const double direct = doubling_ratio(sizes, defects, sizes.front());
  r.values["first_doubling_ratio"] = direct;
  const Extrapolation ex = extrapolate_inverse_n(sizes, dyn, 2);
  const cplx local_limit = (sigma * a).trace() + std::exp(-2.0 * t) * (ra - sa);
  r.values["local_dynamics_extrapolant"] = ex.limit.real();
  r.values["local_dynamics_limit"] = local_limit.real();
  r.values["local_dynamics_error"] = std::abs(ex.limit - local_limit);
  const bool ratio_ok = in_window(fit.doubling_ratio, 1.4, 2.6) && (std::isnan(direct) || in_window(direct, 1.4, 2.6));
  r.pass = ratio_ok && bulk_max == 0.0 && r.values["two_site_identity_gap"] < 1e-14 &&
           r.values["local_dynamics_error"] < 1e-2;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report product_defect(const Mat& a, const Mat& b, const std::vector<int>& sizes) {
  Report r;
  r.name = "product_defect";
  Table tab;
  tab.columns = {"N", "multiplicativity", "commutator"};
  std::vector<double> mult, comm;
  for (int n : sizes) {
    const Mat an = symmetrize(n, a, 1), bn = symmetrize(n, b, 1);
    const Mat ab = symmetrize(n, kron(a, b), 2);
    mult.push_back(operator_norm(Mat(an * bn - ab)));
    comm.push_back(operator_norm(commutator(an, bn)));
    tab.add({double(n), mult.back(), comm.back()});
  }
  r.tables["defects"] = tab;
  const DecayFit fm = fit_power_decay(sizes, mult), fc = fit_power_decay(sizes, comm);
  r.values["multiplicativity_fitted_ratio"] = fm.doubling_ratio;
  r.values["commutator_fitted_ratio"] = fc.doubling_ratio;
  const double dm = doubling_ratio(sizes, mult, 4), dc = doubling_ratio(sizes, comm, 4);
  r.values["multiplicativity_ratio_4_8"] = dm;
  r.values["commutator_ratio_4_8"] = dc;
  bool ok = in_window(fm.doubling_ratio, 1.5, 2.6) && in_window(fc.doubling_ratio, 1.5, 2.6);
  if (!std::isnan(dm)) ok = ok && in_window(dm, 1.5, 2.6) && in_window(dc, 1.5, 2.6);
  r.pass = ok;
  r.verdict = ok ? "pass" : "fail";
  return r;
}

Report bracket_report(const std::vector<int>& sizes) {
  Report r;
  r.name = "bracket";
  Table tab;
  tab.columns = {"rx", "ry", "rz", "extrapolant_re", "extrapolant_im", "expected", "residual", "fit_residual"};
  double worst = 0.0, same = 0.0;
  for (const auto& v : bloch_grid()) {
    const Mat sigma = bloch_state(v);
    const Extrapolation e = bracket_estimate(pauli_x(), pauli_y(), sigma, sizes);
    const double expected = -2.0 * v[2];
    const double res = std::abs(e.limit - cplx(expected));
    worst = std::max(worst, res);
    tab.add({v[0], v[1], v[2], e.limit.real(), e.limit.imag(), expected, res, e.residual});
    for (const auto& c : bracket_estimate(pauli_x(), pauli_x(), sigma, sizes).values) same = std::max(same, std::abs(c));
  }
  r.tables["bracket"] = tab;
  r.values["max_residual"] = worst;
  r.values["self_bracket_max"] = same;
  r.pass = worst < 1e-2 && same == 0.0;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report gradient_report(double step) {
  Report r;
  r.name = "gradient";
  Table tab;
  tab.columns = {"case", "finite_difference", "gradient_pairing", "error", "self_pairing"};
  const Mat a = pauli_x() + 0.5 * pauli_z();
  const Mat b = pauli_y();
  struct Case {
    Mat h;
    int r;
  };
  std::vector<Case> cases = {{identity(2), 1}, {a, 1}, {kron(a, a), 2}, {kron(a, b) + kron(b, a), 2},
                             {kron(kron(a, b), pauli_z()), 3}};
  const Mat sigma = bloch_state({0.3, -0.2, 0.5});
  const Mat rho = bloch_state({-0.4, 0.1, 0.6});
  double worst = 0.0, worst_self = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    auto energy = [&](double s) { return mean_field_energy(c.h, c.r, Mat(s * rho + (1.0 - s) * sigma)); };
    const cplx fd = (energy(step) - energy(-step)) / (2.0 * step);
    const Mat g = gradient_dH(c.h, c.r, sigma);
    const cplx pairing = (rho * g).trace();
    const double err = std::abs(fd - pairing);
    const double self = std::abs((sigma * g).trace());
    worst = std::max(worst, err);
    worst_self = std::max(worst_self, self);
    tab.add({double(i), fd.real(), pairing.real(), err, self});
  }
  r.tables["gradient"] = tab;
  r.values["max_error"] = worst;
  r.values["max_self_pairing"] = worst_self;
  r.pass = worst < 1e-6 && worst_self < 1e-10;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report mean_field_experiment(const ExperimentConfig& config) {
  check_sites(config.n_max, "mean-field experiment");
  if (config.n_max < 4) throw Error("mean-field experiment: n_max must be at least 4");
  std::vector<int> product_sizes, flip_sizes, bracket_sizes;
  for (int n = 4; n <= config.n_max; ++n) product_sizes.push_back(n);
  for (int n = 3; n <= std::min(config.n_max, kMaxFlipSites); ++n) flip_sizes.push_back(n);
  for (int n = 2; n <= config.n_max; ++n) bracket_sizes.push_back(n);
  const auto& e = config.experiment;
  Report r;
  r.name = "mean_field";
  bool known = false;
  if (e == "all" || e == "product-defect") {
    r.children.push_back(product_defect(pauli_x(), pauli_y(), product_sizes));
    known = true;
  }
  if (e == "all" || e == "bracket") {
    r.children.push_back(bracket_report(bracket_sizes));
    known = true;
  }
  if (e == "all" || e == "flip") {
    r.children.push_back(flip_limit_defect(pauli_z(), pauli_x(), bloch_state({0.0, 0.0, 0.8}),
                                           bloch_state({0.5, 0.0, -0.3}), flip_sizes));
    known = true;
  }
  if (e == "all" || e == "gradient") {
    r.children.push_back(gradient_report());
    known = true;
  }
  if (!known) throw Error("unknown mean-field experiment: " + e);
  r.pass = r.children_pass();
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

}  // namespace limitflow::mean_field
