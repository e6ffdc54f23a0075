#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace limitflow {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr cplx kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or label mismatch between an element and the level it should live in.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

// A declared size cap (dimension, N, cutoff) would be exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// A construction or diagnostic was refused because its precondition failed.
class Refused : public Error {
 public:
  using Error::Error;
};

// grid_l1: sum of absolute entries (cell masses of a phase-space grid).
enum class NormKind { hilbert, trace, op, grid_sup, grid_l1 };

std::string to_string(NormKind kind);
NormKind norm_kind_from_string(const std::string& name);

double frobenius_norm(const Mat& x);
double operator_norm(const Mat& x);
double trace_norm(const Mat& x);
double max_abs(const Mat& x);
double norm_of(NormKind kind, const Mat& x);

bool is_hermitian(const Mat& x, double tol = 1e-12);

Mat expm(const Mat& a);
RMat expm(const RMat& a);

// exp(-i t H) for hermitian H via eigendecomposition.
Mat unitary_from_hermitian(const Mat& h, double t);

// Action exp(t A) x of a linear map given only through its application, by
// truncated Taylor series on substeps of size ~1/norm_bound.
Mat expm_apply(const std::function<Mat(const Mat&)>& apply, const Mat& x,
               double t, double norm_bound);

Mat kron(const Mat& a, const Mat& b);
Mat commutator(const Mat& a, const Mat& b);
Mat identity(Eigen::Index n);

Vec vectorize(const Mat& x);
Mat unvectorize(const Vec& v, Eigen::Index rows, Eigen::Index cols);

// Pauli matrices.
Mat pauli_x();
Mat pauli_y();
Mat pauli_z();

}  // namespace limitflow
