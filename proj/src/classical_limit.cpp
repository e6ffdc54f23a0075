#include "limitflow/classical_limit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace limitflow::classical {

FockLevel FockLevel::make(double hbar, int cutoff) {
  if (!(hbar > 0.0 && hbar <= 1.0)) throw Error("Fock level: hbar must lie in (0, 1]");
  if (cutoff < 16) throw Error("Fock level: cutoff must be at least 16");
  if (cutoff > 256) throw CapExceeded("Fock level: cutoff above 256");
  return FockLevel{hbar, cutoff};
}

double FockLevel::validity_radius() const { return std::sqrt(hbar * cutoff); }

int PhaseSpaceGrid::points() const {
  return static_cast<int>(std::lround(2.0 * half_width / spacing)) + 1;
}

std::vector<std::string> PhaseSpaceGrid::validate() const {
  if (half_width < 4.0) throw Error("phase-space grid: half width must be at least 4");
  if (!(spacing > 0.0)) throw Error("phase-space grid: spacing must be positive");
  std::vector<std::string> w;
  if (spacing > 0.1) w.push_back("grid spacing above 0.1: quadrature too coarse");
  return w;
}

GridFunction GridFunction::sample(const PhaseSpaceGrid& grid, const PhaseSpaceFunction& f) {
  const int n = grid.points();
  GridFunction g{grid, Mat(n, n)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g.values(i, j) = f(grid.coord(i), grid.coord(j));
  return g;
}

GridFunction GridFunction::zeros(const PhaseSpaceGrid& grid) {
  return {grid, Mat::Zero(grid.points(), grid.points())};
}

GridFunction GridFunction::from_masses(const PhaseSpaceGrid& grid, const Mat& masses) {
  return {grid, masses / (grid.spacing * grid.spacing)};
}

double GridFunction::l1() const { return values.cwiseAbs().sum() * grid.spacing * grid.spacing; }

cplx GridFunction::integral() const { return values.sum() * grid.spacing * grid.spacing; }

double GridFunction::boundary_mass(double margin) const {
  const int n = grid.points();
  double m = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double q = grid.coord(i), p = grid.coord(j);
      if (std::abs(q) > grid.half_width - margin || std::abs(p) > grid.half_width - margin)
        m += std::abs(values(i, j));
    }
  return m * grid.spacing * grid.spacing;
}

std::array<double, 2> GridFunction::first_moment() const {
  const int n = grid.points();
  cplx mass = 0.0, mq = 0.0, mp = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      mass += values(i, j);
      mq += grid.coord(i) * values(i, j);
      mp += grid.coord(j) * values(i, j);
    }
  return {(mq / mass).real(), (mp / mass).real()};
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
  if (a.values.rows() != b.values.rows() || a.grid.spacing != b.grid.spacing)
    throw ShapeError("grid functions on different grids");
  return (a.values - b.values).cwiseAbs().sum() * a.grid.spacing * a.grid.spacing;
}

Vec coherent_coefficients(const FockLevel& level, double q, double p) {
  const cplx alpha = cplx(q, p) / std::sqrt(2.0 * level.hbar);
  Vec c(level.cutoff);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int k = 1; k < level.cutoff; ++k) c(k) = c(k - 1) * alpha / std::sqrt(double(k));
  return c;
}

Vec coherent_vector(const FockLevel& level, double q, double p) {
  if (std::hypot(q, p) > level.validity_radius()) {
    std::ostringstream os;
    os << "coherent vector at |z| = " << std::hypot(q, p) << " beyond validity radius "
       << level.validity_radius();
    throw Refused(os.str());
  }
  return coherent_coefficients(level, q, p);
}

double coherent_tail_mass(const FockLevel& level, double q, double p) {
  const double a = (q * q + p * p) / (2.0 * level.hbar);
  if (a == 0.0) return 0.0;
  const int k0 = level.cutoff;
  double log_term = -a + k0 * std::log(a) - std::lgamma(k0 + 1.0);
  double sum = 0.0;
  for (int k = k0; k < k0 + 100000; ++k) {
    const double term = std::exp(log_term);
    sum += term;
    if (k > a && term < 1e-18 * std::max(sum, 1e-300)) break;
    log_term += std::log(a) - std::log(k + 1.0);
  }
  return std::min(sum, 1.0);
}

namespace {

Mat row_coefficients(const FockLevel& level, const PhaseSpaceGrid& grid, int i) {
  const int n = grid.points();
  Mat c(level.cutoff, n);
  for (int j = 0; j < n; ++j) c.col(j) = coherent_coefficients(level, grid.coord(i), grid.coord(j));
  return c;
}

}  // namespace

Quantized quantize(const FockLevel& level, const GridFunction& f) {
  Quantized out;
  out.warnings = f.grid.validate();
  const int n = f.grid.points();
  if (f.values.rows() != n || f.values.cols() != n) throw ShapeError("grid function shape");
  const double w = f.grid.spacing * f.grid.spacing;
  const double rv = level.validity_radius();
  out.rho = Mat::Zero(level.cutoff, level.cutoff);
  Mat c(level.cutoff, n);
  Eigen::VectorXcd weights(n);
  for (int i = 0; i < n; ++i) {
    int used = 0;
    for (int j = 0; j < n; ++j) {
      const cplx v = f.values(i, j);
      if (v == cplx(0.0)) continue;
      const double q = f.grid.coord(i), p = f.grid.coord(j);
      c.col(used) = coherent_coefficients(level, q, p);
      weights(used) = v * w;
      ++used;
      if (std::hypot(q, p) > rv) out.outside_validity_mass += std::abs(v) * w;
      out.truncation_bound += 2.0 * std::abs(v) * w * std::sqrt(coherent_tail_mass(level, q, p));
    }
    if (used == 0) continue;
    const auto cu = c.leftCols(used);
    out.rho.noalias() += cu * weights.head(used).asDiagonal() * cu.adjoint();
  }
  if (out.outside_validity_mass > 1e-6) {
    std::ostringstream os;
    os << "mass " << out.outside_validity_mass << " beyond validity radius " << rv;
    out.warnings.push_back(os.str());
  }
  return out;
}

GridFunction dequantize(const FockLevel& level, const Mat& rho, const PhaseSpaceGrid& grid) {
  if (rho.rows() != level.cutoff || rho.cols() != level.cutoff) throw ShapeError("dequantize: rho shape");
  const int n = grid.points();
  GridFunction g{grid, Mat(n, n)};
  const double norm = 1.0 / (2.0 * kPi * level.hbar);
  for (int i = 0; i < n; ++i) {
    const Mat c = row_coefficients(level, grid, i);
    const Mat m = rho * c;
    g.values.row(i) = (c.conjugate().cwiseProduct(m)).colwise().sum() * norm;
  }
  return g;
}

Mat cl_connecting_map(const FockLevel& target, const FockLevel& source, const Mat& rho,
                      const PhaseSpaceGrid& grid) {
  return quantize(target, dequantize(source, rho, grid)).rho;
}

GridFunction gaussian_convolution(const GridFunction& f, double variance) {
  const int n = f.grid.points();
  const double d = f.grid.spacing;
  RMat k(n, n);
  const double norm = d / std::sqrt(2.0 * kPi * variance);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = (i - j) * d;
      k(i, j) = norm * std::exp(-x * x / (2.0 * variance));
    }
  const Mat kc = k.cast<cplx>();
  return {f.grid, kc * f.values * kc.transpose()};
}

HeatDefect heat_transform_defect(const FockLevel& level, const PhaseSpaceFunction& f,
                                 const PhaseSpaceGrid& grid) {
  HeatDefect out;
  auto measure = [&](const PhaseSpaceGrid& g, double* trunc) {
    const GridFunction fg = GridFunction::sample(g, f);
    const Quantized q = quantize(level, fg);
    const GridFunction h = dequantize(level, q.rho, g);
    const GridFunction conv = gaussian_convolution(fg, level.hbar);
    if (trunc) {
      *trunc = q.truncation_bound;
      out.warnings = q.warnings;
      out.vs_identity = l1_distance(h, fg);
    }
    return l1_distance(h, conv);
  };
  out.vs_convolution = measure(grid, &out.truncation_bound);
  const double refined = measure(grid.refined(), nullptr);
  out.quadrature_term = std::abs(out.vs_convolution - refined);
  const double mass = GridFunction::sample(grid, f).l1();
  out.threshold = out.truncation_bound + 10.0 * out.quadrature_term + 1e-12 * (1.0 + mass);
  out.pass = out.vs_convolution <= out.threshold;
  return out;
}

namespace {

std::vector<FockLevel> make_levels(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs) {
  if (hbar_chain.size() != cutoffs.size()) throw Error("one cutoff per hbar value required");
  std::vector<FockLevel> levels;
  for (std::size_t i = 0; i < hbar_chain.size(); ++i) levels.push_back(FockLevel::make(hbar_chain[i], cutoffs[i]));
  return levels;
}

}  // namespace

SoftSystem classical_system(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                            const PhaseSpaceGrid& grid) {
  const auto fock = make_levels(hbar_chain, cutoffs);
  grid.validate();
  std::vector<LevelSpace> spaces;
  for (const auto& f : fock) spaces.push_back(f.space());
  auto rule = [fock, spaces, grid](std::size_t n, std::size_t m) {
    const FockLevel target = fock[n], source = fock[m];
    return ConnectingMap(
        [target, source, grid](const Mat& rho) { return cl_connecting_map(target, source, rho, grid); },
        spaces[m], spaces[n]);
  };
  SoftSystem s = SoftSystem::from_rule(ScaleChain(hbar_chain, Direction::toward_zero), spaces, rule, false);
  s.name = "classical";
  return s;
}

SoftSystem classical_split_system(const std::vector<double>& hbar_chain,
                                  const std::vector<int>& cutoffs, const PhaseSpaceGrid& grid,
                                  const std::vector<GridFunction>& probes) {
  const auto fock = make_levels(hbar_chain, cutoffs);
  const LevelSpace limit = grid.mass_space();
  std::vector<LevelSpace> spaces;
  std::vector<ConnectingMap> i_maps, p_maps;
  for (const auto& f : fock) {
    spaces.push_back(f.space());
    i_maps.emplace_back([f, grid](const Mat& rho) { return dequantize(f, rho, grid).masses(); }, f.space(), limit);
    p_maps.emplace_back(
        [f, grid](const Mat& masses) { return quantize(f, GridFunction::from_masses(grid, masses)).rho; }, limit,
        f.space());
  }
  std::vector<Mat> limit_probes;
  for (const auto& g : probes) limit_probes.push_back(g.masses());
  SoftSystem s = split_system(ScaleChain(hbar_chain, Direction::toward_zero), spaces, limit, i_maps, p_maps,
                              limit_probes);
  s.name = "classical-split";
  return s;
}

LimitModel husimi_limit_model(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                              const PhaseSpaceGrid& grid) {
  const auto fock = make_levels(hbar_chain, cutoffs);
  LimitModel model;
  model.space = grid.mass_space();
  model.limit_of = [fock, grid](const ElementNet& net) {
    return dequantize(fock.back(), net.entries.back(), grid).masses();
  };
  model.lift = [fock, grid](const Mat& masses) {
    ElementNet net;
    for (const auto& f : fock) net.entries.push_back(quantize(f, GridFunction::from_masses(grid, masses)).rho);
    return net;
  };
  return model;
}

GaussianLindbladSpec GaussianLindbladSpec::harmonic() {
  GaussianLindbladSpec s;
  s.a = RMat::Identity(2, 2);
  return s;
}

GaussianLindbladSpec GaussianLindbladSpec::damped_oscillator(double alpha) {
  GaussianLindbladSpec s;
  s.a = RMat::Identity(2, 2);
  s.m << alpha, alpha * kI, -alpha * kI, alpha;
  return s;
}

void GaussianLindbladSpec::validate() const {
  if (a.rows() != 2 || a.cols() != 2 || m.rows() != 2 || m.cols() != 2)
    throw ShapeError("Gaussian Lindblad spec: A and M must be 2x2");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw Error("Gaussian Lindblad spec: A not symmetric");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw Error("Gaussian Lindblad spec: M not hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat((m + m.adjoint()) / 2.0), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw Error("Gaussian Lindblad spec: M not positive semidefinite");
}

RMat GaussianLindbladSpec::im_m() const {
  const Mat im = (kI / 2.0) * (m.conjugate() - m);
  return im.real();
}

CanonicalOps canonical_operators(const FockLevel& level) {
  const int k = level.cutoff;
  CanonicalOps ops;
  ops.a = Mat::Zero(k, k);
  for (int n = 1; n < k; ++n) ops.a(n - 1, n) = std::sqrt(double(n));
  const double s = std::sqrt(level.hbar / 2.0);
  ops.x = s * (ops.a + ops.a.adjoint());
  ops.p = -kI * s * (ops.a - ops.a.adjoint());
  return ops;
}

LindbladOperator::LindbladOperator(const GaussianLindbladSpec& spec, const FockLevel& level) : level_(level) {
  spec.validate();
  const auto ops = canonical_operators(level);
  r_ = {ops.x, ops.p};
  const int k = level.cutoff;
  h_ = Mat::Zero(k, k);
  n_ = Mat::Zero(k, k);
  for (int i = 0; i < 2; ++i) {
    s_[i] = Mat::Zero(k, k);
    for (int j = 0; j < 2; ++j) {
      h_ += 0.5 * spec.a(i, j) * r_[i] * r_[j];
      n_ += spec.m(i, j) * r_[i] * r_[j];
      s_[i] += std::conj(spec.m(i, j)) * r_[j];
    }
  }
  const double hb = level.hbar;
  g_ = -(kI / hb) * h_ - n_ / (2.0 * hb);
  norm_bound_ = 2.0 * operator_norm(g_);
  for (int i = 0; i < 2; ++i) norm_bound_ += operator_norm(r_[i]) * operator_norm(s_[i]) / hb;
}

Mat LindbladOperator::apply(const Mat& rho) const {
  Mat out = g_ * rho + rho * g_.adjoint();
  for (int i = 0; i < 2; ++i) out.noalias() += (r_[i] * rho) * s_[i] / level_.hbar;
  return out;
}

Mat LindbladOperator::adjoint_apply(const Mat& x) const {
  Mat out = x * g_ + g_.adjoint() * x;
  for (int i = 0; i < 2; ++i) out.noalias() += (s_[i] * x) * r_[i] / level_.hbar;
  return out;
}

Mat LindbladOperator::evolve(const Mat& rho, double t) const {
  if (t < 0.0) throw Error("Lindblad evolution: negative time");
  return expm_apply([this](const Mat& r) { return apply(r); }, rho, t, norm_bound_);
}

Mat lindblad_generator(const GaussianLindbladSpec& spec, const FockLevel& level) {
  if (level.cutoff > 48) {
    const double mb = std::pow(double(level.cutoff), 4) * 16.0 / 1048576.0;
    std::ostringstream os;
    os << "dense Lindblad superoperator refused at cutoff " << level.cutoff << " (needs about " << mb
       << " MiB; cap is cutoff 48)";
    throw CapExceeded(os.str());
  }
  const LindbladOperator op(spec, level);
  const int k = level.cutoff;
  Mat out(k * k, k * k);
  Mat e = Mat::Zero(k, k);
  for (int c = 0; c < k * k; ++c) {
    e.setZero();
    e(c % k, c / k) = 1.0;
    out.col(c) = vectorize(op.apply(e));
  }
  return out;
}

std::string to_string(FlowConvention c) {
  switch (c) {
    case FlowConvention::k: return "K";
    case FlowConvention::minus_k: return "-K";
    case FlowConvention::k_transpose: return "K^T";
    case FlowConvention::minus_k_transpose: return "-K^T";
  }
  return "?";
}

FlowConvention flow_convention_from_string(const std::string& s) {
  if (s == "K") return FlowConvention::k;
  if (s == "-K") return FlowConvention::minus_k;
  if (s == "K^T") return FlowConvention::k_transpose;
  if (s == "-K^T") return FlowConvention::minus_k_transpose;
  throw Error("unknown flow convention: " + s);
}

RMat flow_generator(const GaussianLindbladSpec& spec, FlowConvention convention) {
  RMat sigma(2, 2);
  sigma << 0, 1, -1, 0;
  const RMat k = (spec.a - spec.im_m()) * sigma;
  switch (convention) {
    case FlowConvention::k: return k;
    case FlowConvention::minus_k: return -k;
    case FlowConvention::k_transpose: return k.transpose();
    case FlowConvention::minus_k_transpose: return -k.transpose();
  }
  return k;
}

ClassicalFlow classical_flow(const GaussianLindbladSpec& spec, double t, FlowConvention convention) {
  ClassicalFlow f;
  f.generator = flow_generator(spec, convention);
  f.flow = expm(RMat(t * f.generator));
  f.determinant = f.flow.determinant();
  f.angle = std::atan2(f.flow(0, 1) - f.flow(1, 0), f.flow(0, 0) + f.flow(1, 1));
  return f;
}

Mat oscillator_propagator(const FockLevel& level, double t) {
  Mat u = Mat::Zero(level.cutoff, level.cutoff);
  for (int k = 0; k < level.cutoff; ++k) u(k, k) = std::exp(-kI * t * (k + 0.5));
  return u;
}

GridFunction pushforward(const PhaseSpaceFunction& f, const RMat& flow, const PhaseSpaceGrid& grid) {
  const RMat inv = flow.inverse();
  const double jac = 1.0 / std::abs(flow.determinant());
  return GridFunction::sample(grid, [&](double q, double p) {
    const double q0 = inv(0, 0) * q + inv(0, 1) * p;
    const double p0 = inv(1, 0) * q + inv(1, 1) * p;
    return f(q0, p0) * jac;
  });
}

PhaseSpaceFunction Bump::function() const {
  const double w2 = width * width;
  const double norm = 4.0 / (kPi * w2);  // integral of (1 - r^2/w^2)^3 over the disc is pi w^2 / 4
  const double q0c = q0, p0c = p0;
  return [=](double q, double p) -> cplx {
    const double r2 = ((q - q0c) * (q - q0c) + (p - p0c) * (p - p0c)) / w2;
    if (r2 >= 1.0) return 0.0;
    const double s = 1.0 - r2;
    return norm * s * s * s;
  };
}

PhaseSpaceFunction Bump::oscillator_bracket() const {
  const double w2 = width * width;
  const double norm = 4.0 / (kPi * w2);
  const double q0c = q0, p0c = p0;
  return [=](double q, double p) -> cplx {
    const double dq = q - q0c, dp = p - p0c;
    const double r2 = (dq * dq + dp * dp) / w2;
    if (r2 >= 1.0) return 0.0;
    const double s = 1.0 - r2;
    const double common = norm * 3.0 * s * s * (-2.0 / w2);
    const double fq = common * dq;
    const double fp = common * dp;
    return q * fp - p * fq;
  };
}

PhaseSpaceFunction Gaussian::function() const {
  const double v = variance, a = q0, b = p0;
  return [=](double q, double p) -> cplx {
    return std::exp(-((q - a) * (q - a) + (p - b) * (p - b)) / (2.0 * v)) / (2.0 * kPi * v);
  };
}

namespace {

RMat real_log2(const RMat& phi) {
  Eigen::ComplexEigenSolver<Mat> es(phi.cast<cplx>());
  const Mat v = es.eigenvectors();
  Vec l(2);
  for (int i = 0; i < 2; ++i) l(i) = std::log(es.eigenvalues()(i));
  const Mat out = v * l.asDiagonal() * v.inverse();
  return out.real();
}

}  // namespace

MomentFit fit_moment_flow(const GaussianLindbladSpec& spec, const FockLevel& level,
                          const PhaseSpaceGrid& grid, double t) {
  const LindbladOperator op(spec, level);
  const std::array<Bump, 2> starts = {Bump{1.0, 0.0, 1.2}, Bump{0.0, 1.0, 1.2}};
  RMat m0(2, 2), mt(2, 2);
  for (int c = 0; c < 2; ++c) {
    const Quantized q = quantize(level, GridFunction::sample(grid, starts[c].function()));
    const auto a = dequantize(level, q.rho, grid).first_moment();
    const auto b = dequantize(level, op.evolve(q.rho, t), grid).first_moment();
    m0(0, c) = a[0];
    m0(1, c) = a[1];
    mt(0, c) = b[0];
    mt(1, c) = b[1];
  }
  MomentFit fit;
  fit.generator = real_log2(mt * m0.inverse()) / t;
  fit.rate = -fit.generator.trace() / 2.0;
  const double disc = fit.generator.determinant() - fit.rate * fit.rate;
  fit.frequency = disc > 0 ? std::sqrt(disc) : 0.0;
  const std::array<FlowConvention, 4> all = {FlowConvention::k, FlowConvention::minus_k,
                                             FlowConvention::k_transpose, FlowConvention::minus_k_transpose};
  fit.best_relative_error = 1e300;
  for (int i = 0; i < 4; ++i) {
    const RMat cand = flow_generator(spec, all[i]);
    const double scale = std::max(cand.norm(), 1e-300);
    fit.candidate_errors[i] = (fit.generator - cand).norm() / scale;
    if (fit.candidate_errors[i] < fit.best_relative_error) {
      fit.best_relative_error = fit.candidate_errors[i];
      fit.best = all[i];
    }
  }
  return fit;
}

namespace {

double support_radius(const Bump& b) { return std::hypot(b.q0, b.p0) + b.width; }

void halving_ratios(Report& r, const std::vector<double>& errors, double lo, double hi) {
  Table t;
  t.columns = {"step", "ratio"};
  bool ok = errors.size() >= 2;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    t.add({double(i), ratio});
    if (!(ratio >= lo && ratio <= hi)) ok = false;
  }
  r.tables["ratios"] = t;
  r.notes["ratio_window"] = format_double(lo) + ".." + format_double(hi);
  r.pass = ok;
}

}  // namespace

Report classical_limit_experiment(const ExperimentConfig& config) {
  const auto fock = make_levels(config.hbar_chain, config.cutoffs);
  const auto grid_warnings = config.grid.validate();
  Report r;
  r.name = "classical_" + config.kind;
  for (std::size_t i = 0; i < grid_warnings.size(); ++i) r.notes["grid_warning_" + std::to_string(i)] = grid_warnings[i];
  const auto f = config.probe.function();
  bool validity_ok = true;
  Table errors;
  errors.columns = {"hbar", "cutoff", "validity_radius", "support_radius", "truncation_bound", "l1_error"};
  std::vector<double> errs;

  if (config.kind == "hamiltonian_ho") {
    const RMat rot = classical_flow(GaussianLindbladSpec::harmonic(), config.t).flow;
    const GridFunction exact = pushforward(f, rot, config.grid);
    for (const auto& level : fock) {
      const Quantized q = quantize(level, GridFunction::sample(config.grid, f));
      const Mat u = oscillator_propagator(level, config.t);
      const GridFunction h = dequantize(level, u * q.rho * u.adjoint(), config.grid);
      const double e = l1_distance(h, exact);
      errs.push_back(e);
      if (support_radius(config.probe) > level.validity_radius()) validity_ok = false;
      errors.add({level.hbar, double(level.cutoff), level.validity_radius(), support_radius(config.probe),
                  q.truncation_bound, e});
    }
    r.tables["errors"] = errors;
    halving_ratios(r, errs, 1.6, 2.6);
  } else if (config.kind == "gaussian_lindblad") {
    Table fits;
    fits.columns = {"hbar", "rate", "frequency", "best_convention", "best_rel_error", "err_K", "err_-K",
                    "err_K^T", "err_-K^T"};
    bool fit_ok = true;
    std::vector<FlowConvention> bests;
    for (const auto& level : fock) {
      const MomentFit fit = fit_moment_flow(config.spec, level, config.grid, config.fit_time);
      const RMat cand = flow_generator(config.spec, fit.best);
      const double expected_rate = -cand.trace() / 2.0;
      const double rate_err = std::abs(fit.rate - expected_rate) / std::max(std::abs(expected_rate), 1e-12);
      if (!(fit.best_relative_error < 0.1 && rate_err < 0.1)) fit_ok = false;
      bests.push_back(fit.best);
      fits.add({level.hbar, fit.rate, fit.frequency, double(static_cast<int>(fit.best)), fit.best_relative_error,
                fit.candidate_errors[0], fit.candidate_errors[1], fit.candidate_errors[2], fit.candidate_errors[3]});
    }
    bool agree = true;
    for (auto b : bests) agree = agree && b == bests.front();
    const FlowConvention resolved = bests.front();
    r.notes["resolved_convention"] = to_string(resolved);
    r.notes["im_m_reading"] = "entrywise conjugate";
    r.tables["moment_fit"] = fits;
    const ClassicalFlow flow = classical_flow(config.spec, config.t, resolved);
    r.values["flow_determinant"] = flow.determinant;
    r.values["flow_angle"] = flow.angle;
    const GridFunction exact = pushforward(f, flow.flow, config.grid);
    for (const auto& level : fock) {
      const Quantized q = quantize(level, GridFunction::sample(config.grid, f));
      const LindbladOperator op(config.spec, level);
      const GridFunction h = dequantize(level, op.evolve(q.rho, config.t), config.grid);
      const double e = l1_distance(h, exact);
      errs.push_back(e);
      if (support_radius(config.probe) > level.validity_radius()) validity_ok = false;
      errors.add({level.hbar, double(level.cutoff), level.validity_radius(), support_radius(config.probe),
                  q.truncation_bound, e});
    }
    r.tables["errors"] = errors;
    Report ratios;
    halving_ratios(ratios, errs, 1.6, 2.6);
    r.tables["ratios"] = ratios.tables["ratios"];
    r.notes["pushforward_trend"] = ratios.pass ? "halving" : "not-halving";
    r.pass = fit_ok && agree;
  } else {
    throw Error("unknown classical-limit kind: " + config.kind);
  }
  r.notes["validity"] = validity_ok ? "ok" : "violated";
  if (!validity_ok) r.pass = false;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report heat_experiment(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                       const PhaseSpaceGrid& grid, const std::vector<Gaussian>& probes) {
  const auto fock = make_levels(hbar_chain, cutoffs);
  Report r;
  r.name = "classical_heat";
  Table t;
  t.columns = {"probe", "hbar", "cutoff", "vs_convolution", "threshold", "vs_identity"};
  bool below = true, decreasing = true;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    double prev = 1e300;
    for (const auto& level : fock) {
      const HeatDefect d = heat_transform_defect(level, probes[p].function(), grid);
      t.add({double(p), level.hbar, double(level.cutoff), d.vs_convolution, d.threshold, d.vs_identity});
      below = below && d.pass;
      if (!(d.vs_identity < prev)) decreasing = false;
      prev = d.vs_identity;
    }
  }
  r.tables["heat"] = t;
  r.notes["below_threshold"] = below ? "yes" : "no";
  r.notes["identity_decreasing"] = decreasing ? "yes" : "no";

  const SoftSystem sys = classical_system(hbar_chain, cutoffs, grid);
  std::vector<LevelProbe> lp;
  for (const auto& g : probes)
    lp.push_back({0, quantize(fock[0], GridFunction::sample(grid, g.function())).rho});
  Report soft = soft_transitivity_defect(sys, lp, kExactTol);
  bool soft_decreasing = true;
  const auto& rows = soft.tables["defect"].rows;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    double prev = 1e300;
    for (const auto& row : rows) {
      if (row[0] != double(p)) continue;
      const std::size_t m = sys.chain().index_of(row[2]);
      const std::size_t n = sys.chain().index_of(row[3]);
      if (n != m + 1) continue;
      if (!(row[4] < prev)) soft_decreasing = false;
      prev = row[4];
    }
  }
  soft.notes["decreasing_along_chain"] = soft_decreasing ? "yes" : "no";
  if (!soft_decreasing) soft.pass = false;
  r.children.push_back(soft);

  const auto basic = jconvergence_diagnostic(sys, make_basic_net_at(sys, 0, lp.front().x), kTrendTol);
  // Informational: at desk scale the basic net from the coarsest level is
  // still far from its tail.
  Table bt;
  bt.columns = {"m", "dhat"};
  for (std::size_t i = 0; i < basic.dhat.size(); ++i) bt.add({basic.labels[i], basic.dhat[i]});
  r.tables["basic_net_dhat"] = bt;
  r.notes["basic_net_verdict"] = to_string(basic.verdict);
  r.pass = below && decreasing && soft.pass;
  r.verdict = r.pass ? "pass" : "fail";
  return r;
}

Report poisson_bracket_trail(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                             const PhaseSpaceGrid& grid, const Bump& probe) {
  const auto fock = make_levels(hbar_chain, cutoffs);
  Report r;
  r.name = "poisson_bracket";
  const GridFunction target = GridFunction::sample(grid, probe.oscillator_bracket());
  Table t;
  t.columns = {"hbar", "l1_error"};
  std::vector<double> errs;
  for (const auto& level : fock) {
    const Mat rho = quantize(level, GridFunction::sample(grid, probe.function())).rho;
    Mat c(level.cutoff, level.cutoff);
    for (int n = 0; n < level.cutoff; ++n)
      for (int m = 0; m < level.cutoff; ++m) c(m, n) = -kI * double(m - n) * rho(m, n);
    const double e = l1_distance(dequantize(level, c, grid), target);
    errs.push_back(e);
    t.add({level.hbar, e});
  }
  r.tables["trail"] = t;
  bool dec = true;
  for (std::size_t i = 1; i < errs.size(); ++i) dec = dec && errs[i] < errs[i - 1];
  r.pass = dec;
  r.verdict = dec ? "converging" : "not-converging";
  return r;
}

}  // namespace limitflow::classical
