#include "limitflow/thompson.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "limitflow/rng.hpp"

namespace limitflow::thompson {

namespace {

constexpr int kMaxScale = 40;

bool on_grid(double x, int scale) {
  const double s = std::ldexp(x, scale);
  return s == std::floor(s);
}

int dyadic_order(double x) {
  for (int s = 0; s <= kMaxScale; ++s)
    if (on_grid(x, s)) return s;
  throw Error("thompson: breakpoint is not a dyadic rational");
}

int exponent_of(double slope) {
  int e = 0;
  const double m = std::frexp(slope, &e);
  if (m != 0.5) throw Error("thompson: slope is not a power of two");
  return e - 1;
}

PLMap simplified(std::vector<std::pair<double, double>> pts) {
  PLMap out;
  for (const auto& p : pts) {
    if (!out.points.empty() && out.points.back().first == p.first) continue;
    out.points.push_back(p);
  }
  // Drop vertices where the slope does not change.
  std::vector<std::pair<double, double>> keep = {out.points.front()};
  for (std::size_t i = 1; i + 1 < out.points.size(); ++i) {
    const auto &a = keep.back(), &b = out.points[i], &c = out.points[i + 1];
    const double s1 = (b.second - a.second) / (b.first - a.first);
    const double s2 = (c.second - b.second) / (c.first - b.first);
    if (s1 != s2) keep.push_back(b);
  }
  keep.push_back(out.points.back());
  out.points = keep;
  return out;
}

}  // namespace

PLMap PLMap::identity() { return {{{0.0, 0.0}, {1.0, 1.0}}}; }

PLMap PLMap::generator_a() { return {{{0.0, 0.0}, {0.25, 0.5}, {0.5, 0.75}, {1.0, 1.0}}}; }

PLMap PLMap::generator_b() {
  return {{{0.0, 0.0}, {0.5, 0.5}, {0.625, 0.75}, {0.75, 0.875}, {1.0, 1.0}}};
}

void PLMap::validate() const {
  if (points.size() < 2 || points.front() != std::make_pair(0.0, 0.0) || points.back() != std::make_pair(1.0, 1.0))
    throw Error("thompson: map must fix 0 and 1");
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1].first > points[i].first) || !(points[i + 1].second > points[i].second))
      throw Error("thompson: breakpoints must be strictly increasing");
    dyadic_order(points[i].first);
    dyadic_order(points[i].second);
  }
  exponents();
}

double PLMap::operator()(double x) const {
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (x <= points[i + 1].first || i + 2 == points.size()) {
      const auto &a = points[i], &b = points[i + 1];
      return a.second + (x - a.first) * (b.second - a.second) / (b.first - a.first);
    }
  return x;
}

PLMap PLMap::inverse() const {
  PLMap inv;
  for (const auto& [x, y] : points) inv.points.emplace_back(y, x);
  return inv;
}

PLMap PLMap::after(const PLMap& g) const {
  const PLMap ginv = g.inverse();
  std::set<double> xs;
  for (const auto& p : g.points) xs.insert(p.first);
  for (const auto& p : points) xs.insert(ginv(p.first));
  std::vector<std::pair<double, double>> pts;
  for (double x : xs) pts.emplace_back(x, (*this)(g(x)));
  return simplified(pts);
}

std::vector<int> PLMap::exponents() const {
  std::vector<int> e;
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    e.push_back(exponent_of((points[i + 1].second - points[i].second) / (points[i + 1].first - points[i].first)));
  return e;
}

int PLMap::exponent_at(double x) const {
  const auto e = exponents();
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (x < points[i + 1].first) return e[i];
  return e.back();
}

int PLMap::min_exponent() const {
  const auto e = exponents();
  return *std::min_element(e.begin(), e.end());
}

int PLMap::resolving_scale() const {
  validate();
  const int shift = -min_exponent();
  for (int n = 0; n + shift <= kMaxScale; ++n) {
    bool ok = true;
    for (const auto& [x, y] : points) ok = ok && on_grid(x, n) && on_grid(y, n + shift);
    if (ok) return n;
  }
  throw CapExceeded("thompson: map not resolvable below the scale cap");
}

CellVector haar_embed(const CellVector& v, int scale) {
  if (scale < v.scale) throw Error("thompson: cannot embed to a coarser scale");
  Mat c = v.coeffs;
  const double r = 1.0 / std::sqrt(2.0);
  for (int s = v.scale; s < scale; ++s) {
    Mat next(2 * c.rows(), c.cols());
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      next.row(2 * i) = r * c.row(i);
      next.row(2 * i + 1) = r * c.row(i);
    }
    c = std::move(next);
  }
  return {scale, c};
}

double distance(const CellVector& a, const CellVector& b) {
  const int s = std::max(a.scale, b.scale);
  return (haar_embed(a, s).coeffs - haar_embed(b, s).coeffs).norm();
}

CellVector act(const PLMap& f, const CellVector& xi) {
  const int need = f.resolving_scale();
  if (xi.scale < need) {
    std::ostringstream os;
    os << "thompson: map not resolvable at scale " << xi.scale << "; minimal resolving scale is " << need;
    throw Refused(os.str());
  }
  if (xi.coeffs.rows() != (Eigen::Index(1) << xi.scale)) throw ShapeError("thompson: coefficient count mismatch");
  const int out_scale = xi.scale - f.min_exponent();
  const Eigen::Index out_cells = Eigen::Index(1) << out_scale;
  const PLMap finv = f.inverse();
  CellVector out{out_scale, Mat::Zero(out_cells, xi.coeffs.cols())};
  for (Eigen::Index c = 0; c < out_cells; ++c) {
    const double mid = std::ldexp(double(c) + 0.5, -out_scale);
    const double pre = finv(mid);
    const Eigen::Index i = static_cast<Eigen::Index>(std::floor(std::ldexp(pre, xi.scale)));
    const double slope = std::ldexp(1.0, f.exponent_at(pre));
    out.coeffs.row(c) = xi.coeffs.row(i) * (std::sqrt(std::ldexp(1.0, xi.scale - out_scale) / slope));
  }
  return out;
}

CellVector act_lifted(const PLMap& f, const CellVector& xi) {
  return act(f, haar_embed(xi, std::max(xi.scale, f.resolving_scale())));
}

double diffeo_distance(const PLMap& f, const Diffeo& phi, const CellVector& xi, int quad_scale) {
  const CellVector pl = haar_embed(act_lifted(f, xi), std::max(quad_scale, xi.scale - f.min_exponent()));
  const Eigen::Index cells = Eigen::Index(1) << pl.scale;
  const double h = std::ldexp(1.0, -pl.scale);
  double sum = 0.0;
  for (Eigen::Index c = 0; c < cells; ++c) {
    const double x = (double(c) + 0.5) * h;
    const double pre = phi.inverse(x);
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(std::ldexp(pre, xi.scale))),
                                                  xi.coeffs.rows() - 1);
    const double amp = std::sqrt(std::abs(phi.inverse_derivative(x)));
    const Mat smooth = xi.coeffs.row(i) * (amp * std::sqrt(std::ldexp(1.0, xi.scale)));
    const Mat piecewise = pl.coeffs.row(c) / std::sqrt(h);
    sum += (smooth - piecewise).squaredNorm() * h;
  }
  return std::sqrt(sum);
}

namespace {

struct Named {
  std::string name;
  PLMap map;
};

std::vector<Named> sample_elements() {
  const PLMap a = PLMap::generator_a(), b = PLMap::generator_b();
  return {{"identity", PLMap::identity()},
          {"a", a},
          {"b", b},
          {"a_inv", a.inverse()},
          {"ab", a.after(b)},
          {"b_a_inv_b", b.after(a.inverse()).after(b)}};
}

}  // namespace

Report thompson_report(std::uint64_t seed) {
  Report r;
  r.name = "thompson";
  CounterRng rng(seed);
  Table t;
  t.columns = {"element", "resolving_scale", "output_scale", "gram_gap", "inverse_gap", "refusal_ok"};
  double worst_unitary = 0.0, worst_inverse = 0.0, worst_group = 0.0, worst_compose = 0.0;
  bool refusals = true;
  const auto elems = sample_elements();
  for (std::size_t e = 0; e < elems.size(); ++e) {
    const PLMap& f = elems[e].map;
    const int n = f.resolving_scale();
    const CellVector xi{n, rng.complex_gaussian(Eigen::Index(1) << n, 3)};
    const CellVector y = act(f, xi);
    const Mat g0 = xi.coeffs.adjoint() * xi.coeffs;
    const double gram = max_abs(Mat(y.coeffs.adjoint() * y.coeffs - g0)) / std::max(1.0, max_abs(g0));
    const double inv = distance(act_lifted(f.inverse(), y), xi);
    const double group = distance(act_lifted(f.after(f.inverse()), xi), xi) +
                         (f.after(f.inverse()) == PLMap::identity() ? 0.0 : 1.0);
    bool refused = n == 0;
    if (n > 0) {
      try {
        act(f, CellVector{n - 1, Mat::Zero(Eigen::Index(1) << (n - 1), 1)});
      } catch (const Refused& err) {
        refused = std::string(err.what()).find("minimal resolving scale is " + std::to_string(n)) != std::string::npos;
      }
    }
    refusals = refusals && refused;
    worst_unitary = std::max(worst_unitary, gram);
    worst_inverse = std::max(worst_inverse, inv);
    worst_group = std::max(worst_group, group);
    t.add({double(e), double(n), double(y.scale), gram, inv, refused ? 1.0 : 0.0});
  }
  Table comp;
  comp.columns = {"f", "g", "scale", "gap"};
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (std::size_t j = 0; j < elems.size(); ++j) {
      const PLMap fg = elems[i].map.after(elems[j].map);
      const int n = std::max(fg.resolving_scale(), elems[j].map.resolving_scale());
      const CellVector xi{n, rng.complex_gaussian(Eigen::Index(1) << n, 2)};
      const double gap = distance(act_lifted(fg, xi), act_lifted(elems[i].map, act_lifted(elems[j].map, xi)));
      worst_compose = std::max(worst_compose, gap);
      comp.add({double(i), double(j), double(n), gap});
    }
  // Smooth comparison: a diffeomorphism close to generator_a, for information.
  const Diffeo phi{[](double x) { return x - 0.8 * x * (1.0 - x); }, [](double x) { return 1.0 - 0.8 * (1.0 - 2.0 * x); }};
  const CellVector flat{2, Mat::Constant(4, 1, 0.5)};
  r.values["diffeo_l2_distance"] = diffeo_distance(PLMap::generator_a(), phi, flat, 12);
  r.tables["elements"] = t;
  r.tables["composition"] = comp;
  r.values["unitarity_gap"] = worst_unitary;
  r.values["inverse_gap"] = worst_inverse;
  r.values["group_identity_gap"] = worst_group;
  r.values["composition_gap"] = worst_compose;
  r.notes["refusals"] = refusals ? "minimal scale reported" : "missing";
  r.pass = worst_unitary < 1e-12 && worst_inverse < 1e-12 && worst_group < 1e-12 && worst_compose < 1e-12 && refusals;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

}  // namespace limitflow::thompson
