#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "limitflow/inductive.hpp"

namespace limitflow::classical {

using PhaseSpaceFunction = std::function<cplx(double q, double p)>;

// Truncated Fock space at action scale hbar.
struct FockLevel {
  double hbar = 0.1;
  int cutoff = 64;

  static FockLevel make(double hbar, int cutoff);
  double validity_radius() const;
  LevelSpace space() const { return LevelSpace::matrices(cutoff, NormKind::trace, false); }
};

// Square grid [-R, R]^2 with spacing delta; index i -> -R + i*delta.
struct PhaseSpaceGrid {
  double half_width = 6.0;
  double spacing = 0.05;

  int points() const;
  double coord(int i) const { return -half_width + i * spacing; }
  PhaseSpaceGrid refined() const { return {half_width, spacing / 2}; }
  // Throws on R < 4; returns warnings (spacing above 0.1).
  std::vector<std::string> validate() const;
  LevelSpace mass_space() const { return LevelSpace{points(), points(), NormKind::grid_l1, false}; }
};

// values(i, j) = f(q_i, p_j).
struct GridFunction {
  PhaseSpaceGrid grid;
  Mat values;

  static GridFunction sample(const PhaseSpaceGrid& grid, const PhaseSpaceFunction& f);
  static GridFunction zeros(const PhaseSpaceGrid& grid);
  static GridFunction from_masses(const PhaseSpaceGrid& grid, const Mat& masses);
  Mat masses() const { return values * (grid.spacing * grid.spacing); }
  double l1() const;
  cplx integral() const;
  // Mass within distance `margin` of the grid boundary.
  double boundary_mass(double margin) const;
  std::array<double, 2> first_moment() const;
};

double l1_distance(const GridFunction& a, const GridFunction& b);

Vec coherent_coefficients(const FockLevel& level, double q, double p);
// Refuses points beyond the validity radius.
Vec coherent_vector(const FockLevel& level, double q, double p);
// Probability mass of the coherent state above the cutoff.
double coherent_tail_mass(const FockLevel& level, double q, double p);

struct Quantized {
  Mat rho;
  std::vector<std::string> warnings;
  double outside_validity_mass = 0.0;
  double truncation_bound = 0.0;
};

Quantized quantize(const FockLevel& level, const GridFunction& f);
GridFunction dequantize(const FockLevel& level, const Mat& rho, const PhaseSpaceGrid& grid);
Mat cl_connecting_map(const FockLevel& target, const FockLevel& source, const Mat& rho,
                      const PhaseSpaceGrid& grid);

// Direct separable convolution with the centered Gaussian of the given
// variance per coordinate, by grid quadrature.
GridFunction gaussian_convolution(const GridFunction& f, double variance);

struct HeatDefect {
  double vs_convolution = 0.0;
  double vs_identity = 0.0;
  double threshold = 0.0;
  double truncation_bound = 0.0;
  double quadrature_term = 0.0;
  bool pass = false;
  std::vector<std::string> warnings;
};

// L1 distance between dequantize(quantize(f)) and G_hbar * f. The threshold
// is the coherent-state truncation bound plus a refined-quadrature term.
HeatDefect heat_transform_defect(const FockLevel& level, const PhaseSpaceFunction& f,
                                 const PhaseSpaceGrid& grid);

SoftSystem classical_system(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                            const PhaseSpaceGrid& grid);
// Same maps, assembled from dequantize/quantize as a split system with the
// grid-L1 limit model; refused when the heat defect is not decreasing.
SoftSystem classical_split_system(const std::vector<double>& hbar_chain,
                                  const std::vector<int>& cutoffs, const PhaseSpaceGrid& grid,
                                  const std::vector<GridFunction>& probes);
LimitModel husimi_limit_model(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                              const PhaseSpaceGrid& grid);

struct GaussianLindbladSpec {
  RMat a = RMat::Zero(2, 2);
  Mat m = Mat::Zero(2, 2);

  static GaussianLindbladSpec harmonic();
  static GaussianLindbladSpec damped_oscillator(double alpha);
  void validate() const;
  // (i/2)(M* - M) with M* read as the entrywise conjugate.
  RMat im_m() const;
};

struct CanonicalOps {
  Mat a;
  Mat x;
  Mat p;
};

CanonicalOps canonical_operators(const FockLevel& level);

// Trace-preserving Gaussian Lindbladian in matrix form:
// L(rho) = -(i/hbar)[H, rho] + (1/2hbar) sum_kl conj(M_kl)(2 R_k rho R_l)
//          - (1/2hbar){sum_kl M_kl R_k R_l, rho},  H = (1/2) R^T A R.
class LindbladOperator {
 public:
  LindbladOperator(const GaussianLindbladSpec& spec, const FockLevel& level);

  Mat apply(const Mat& rho) const;
  Mat adjoint_apply(const Mat& x) const;
  double norm_bound() const { return norm_bound_; }
  Mat evolve(const Mat& rho, double t) const;
  const Mat& hamiltonian() const { return h_; }

 private:
  FockLevel level_;
  std::array<Mat, 2> r_;
  std::array<Mat, 2> s_;
  Mat h_;
  Mat n_;
  Mat g_;
  double norm_bound_ = 0.0;
};

// Dense superoperator on column-major vec(rho); cutoff capped at 48.
Mat lindblad_generator(const GaussianLindbladSpec& spec, const FockLevel& level);

enum class FlowConvention { k, minus_k, k_transpose, minus_k_transpose };
std::string to_string(FlowConvention c);
FlowConvention flow_convention_from_string(const std::string& s);

// K = (A - Im M) sigma with sigma = [[0, 1], [-1, 0]], then oriented by the convention.
RMat flow_generator(const GaussianLindbladSpec& spec, FlowConvention convention);

struct ClassicalFlow {
  RMat generator;
  RMat flow;
  double determinant = 1.0;
  double angle = 0.0;
};

ClassicalFlow classical_flow(const GaussianLindbladSpec& spec, double t,
                             FlowConvention convention = FlowConvention::minus_k_transpose);

// exp(-i t H/hbar) for the oscillator H = (1/2)(x^2 + p^2): diag(exp(-i t (k + 1/2))).
Mat oscillator_propagator(const FockLevel& level, double t);

// Density transported by the linear flow z -> flow * z (Jacobian included).
GridFunction pushforward(const PhaseSpaceFunction& f, const RMat& flow, const PhaseSpaceGrid& grid);

// Smooth compactly supported bump (1 - r^2/w^2)^3, normalized to unit mass.
struct Bump {
  double q0 = 0.4;
  double p0 = 0.2;
  double width = 2.0;

  PhaseSpaceFunction function() const;
  // Poisson bracket {H0, f} for H0 = (q^2 + p^2)/2.
  PhaseSpaceFunction oscillator_bracket() const;
};

struct Gaussian {
  double q0 = 0.0;
  double p0 = 0.0;
  double variance = 0.1;

  PhaseSpaceFunction function() const;
};

struct MomentFit {
  RMat generator;
  double rate = 0.0;
  double frequency = 0.0;
  FlowConvention best = FlowConvention::minus_k_transpose;
  double best_relative_error = 0.0;
  std::array<double, 4> candidate_errors{};
};

// Fits the linear flow of Husimi first moments from two initial bumps and
// ranks the four orientation candidates of K.
MomentFit fit_moment_flow(const GaussianLindbladSpec& spec, const FockLevel& level,
                          const PhaseSpaceGrid& grid, double t);

struct ExperimentConfig {
  std::string kind = "hamiltonian_ho";  // hamiltonian_ho | gaussian_lindblad
  std::vector<double> hbar_chain = {0.4, 0.2, 0.1};
  std::vector<int> cutoffs = {32, 48, 64};
  PhaseSpaceGrid grid;
  GaussianLindbladSpec spec = GaussianLindbladSpec::harmonic();
  double t = 1.0;
  Bump probe;
  double fit_time = 1.0;
};

Report classical_limit_experiment(const ExperimentConfig& config);

// Heat-transform and soft-transitivity checks over an hbar chain.
Report heat_experiment(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                       const PhaseSpaceGrid& grid, const std::vector<Gaussian>& probes);

// Trail of dequantize(-(i/hbar)[H, quantize f]) against {H0, f} for the oscillator.
Report poisson_bracket_trail(const std::vector<double>& hbar_chain, const std::vector<int>& cutoffs,
                             const PhaseSpaceGrid& grid, const Bump& probe);

}  // namespace limitflow::classical
