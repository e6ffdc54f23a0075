#include "limitflow/linalg.hpp"

#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace limitflow {

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::hilbert: return "hilbert";
    case NormKind::trace: return "trace";
    case NormKind::op: return "operator";
    case NormKind::grid_sup: return "grid_sup";
    case NormKind::grid_l1: return "grid_l1";
  }
  return "unknown";
}

NormKind norm_kind_from_string(const std::string& name) {
  if (name == "hilbert") return NormKind::hilbert;
  if (name == "trace") return NormKind::trace;
  if (name == "operator" || name == "op") return NormKind::op;
  if (name == "grid_sup") return NormKind::grid_sup;
  if (name == "grid_l1") return NormKind::grid_l1;
  throw Error("unknown norm kind: " + name);
}

bool is_hermitian(const Mat& x, double tol) {
  if (x.rows() != x.cols()) return false;
  double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  return (x - x.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double frobenius_norm(const Mat& x) { return x.norm(); }

double max_abs(const Mat& x) {
  if (x.size() == 0) return 0.0;
  return x.cwiseAbs().maxCoeff();
}

namespace {

RVec singular_values(const Mat& x) {
  if (x.size() == 0) return RVec();
  if (std::min(x.rows(), x.cols()) > 64) {
    Eigen::BDCSVD<Mat> svd(x);
    return svd.singularValues();
  }
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues();
}

RVec hermitian_eigenvalues(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(x, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

double operator_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  if (x.cols() == 1 || x.rows() == 1) return x.norm();
  if (is_hermitian(x, 1e-14)) return hermitian_eigenvalues(x).cwiseAbs().maxCoeff();
  return singular_values(x)(0);
}

double trace_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  if (x.cols() == 1 || x.rows() == 1) return x.norm();
  if (is_hermitian(x, 1e-14)) return hermitian_eigenvalues(x).cwiseAbs().sum();
  return singular_values(x).sum();
}

double norm_of(NormKind kind, const Mat& x) {
  switch (kind) {
    case NormKind::hilbert: return frobenius_norm(x);
    case NormKind::trace: return trace_norm(x);
    case NormKind::op: return operator_norm(x);
    case NormKind::grid_sup: return max_abs(x);
    case NormKind::grid_l1: return x.cwiseAbs().sum();
  }
  return 0.0;
}

namespace {

template <typename M>
double one_norm(const M& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};

template <typename M, std::size_t K>
M pade_low(const M& a, const std::array<double, K>& b) {
  const auto n = a.rows();
  M id = M::Identity(n, n);
  M a2 = a * a;
  M power = id;
  M u = M::Zero(n, n);
  M v = M::Zero(n, n);
  for (std::size_t k = 0; k + 1 < K; k += 2) {
    v += b[k] * power;
    u += b[k + 1] * power;
    power = power * a2;
  }
  u = a * u;
  return (v - u).partialPivLu().solve(v + u);
}

template <typename M>
M pade13(const M& a) {
  const auto n = a.rows();
  const auto& b = kPade13;
  M id = M::Identity(n, n);
  M a2 = a * a;
  M a4 = a2 * a2;
  M a6 = a4 * a2;
  M u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  M u = a * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  M v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  M v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

template <typename M>
M expm_impl(const M& a) {
  if (a.rows() != a.cols()) throw ShapeError("expm: matrix not square");
  if (a.size() == 0) return a;
  const double norm = one_norm(a);
  if (norm <= 1.495585217958292e-2) return pade_low(a, kPade3);
  if (norm <= 2.539398330063230e-1) return pade_low(a, kPade5);
  if (norm <= 9.504178996162932e-1) return pade_low(a, kPade7);
  if (norm <= 2.097847961257068) return pade_low(a, kPade9);
  constexpr double theta13 = 5.371920351148152;
  int s = 0;
  if (norm > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
  M scaled = a / std::ldexp(1.0, s);
  M r = pade13(scaled);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

}  // namespace

Mat expm(const Mat& a) { return expm_impl(a); }
RMat expm(const RMat& a) { return expm_impl(a); }

Mat unitary_from_hermitian(const Mat& h, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Mat& v = es.eigenvectors();
  Vec phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    phases(i) = std::exp(-kI * t * es.eigenvalues()(i));
  return v * phases.asDiagonal() * v.adjoint();
}

Mat expm_apply(const std::function<Mat(const Mat&)>& apply, const Mat& x, double t,
               double norm_bound) {
  if (t == 0.0 || x.size() == 0) return x;
  const double total = std::abs(t) * std::max(norm_bound, 0.0);
  const int steps = std::max(1, static_cast<int>(std::ceil(total / 3.0)));
  const double h = t / steps;
  Mat y = x;
  for (int s = 0; s < steps; ++s) {
    Mat term = y;
    Mat acc = y;
    int small = 0;
    for (int k = 1; k <= 80; ++k) {
      term = apply(term) * (h / k);
      acc += term;
      const double tn = term.norm();
      if (tn <= 1e-17 * std::max(acc.norm(), 1e-300)) {
        if (++small >= 2) break;
      } else {
        small = 0;
      }
    }
    y = std::move(acc);
  }
  return y;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

Vec vectorize(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }

Mat unvectorize(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw ShapeError("unvectorize: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace limitflow
