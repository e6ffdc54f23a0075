#pragma once

#include <array>
#include <vector>

#include "limitflow/inductive.hpp"

namespace limitflow::mean_field {

constexpr int kMaxSites = 8;
constexpr int kMaxFlipSites = 6;

// a on m sites -> average over ordered site injections of a (x) 1 on n sites.
Mat symmetrize(int n, const Mat& a, int m, int d = 2);
// Operator on n sites with the given site permutation applied: (P x P^dag).
Mat permute_sites(const Mat& x, int n, const std::vector<int>& perm, int d = 2);
Mat swap_sites(const Mat& x, int n, int i, int j, int d = 2);

Mat bloch_state(const std::array<double, 3>& r);
// Center, six face points on the axes, six mid-radius points on the
// coordinate-plane diagonals.
std::vector<std::array<double, 3>> bloch_grid();
Mat product_state(const Mat& sigma, int n);
cplx eval_product_state(const Mat& sigma, const Mat& a, int n);

SoftSystem mean_field_system(int n_max, int d = 2);

struct Extrapolation {
  std::vector<int> sizes;
  std::vector<cplx> values;
  cplx limit = 0.0;
  cplx slope = 0.0;
  double residual = 0.0;
};
// Least-squares fit of value = limit + slope / N (+ higher powers of 1/N up
// to the given order).
Extrapolation extrapolate_inverse_n(const std::vector<int>& sizes, const std::vector<cplx>& values,
                                    int order = 1);

// sigma^{(x)N}(i N [j_N1 a, j_N1 b]) per N, extrapolated in 1/N.
Extrapolation bracket_estimate(const Mat& a, const Mat& b, const Mat& sigma, const std::vector<int>& sizes);

// Gradient of H(sigma) = sigma^{(x)R}(h) on the one-site state space.
Mat gradient_dH(const Mat& h, int r, const Mat& sigma);
cplx mean_field_energy(const Mat& h, int r, const Mat& sigma);

// Gamma_N(X) = (N-1)^{-1} sum_{i,j} (F_ij X F_ij - X).
Mat flip_apply(const Mat& x, int n, int d = 2);
Mat flip_generator(int n, int d = 2);

// Decay of power-law defects: fitted exponent and the ratio per doubling.
struct DecayFit {
  double exponent = 0.0;
  double doubling_ratio = 0.0;
};
DecayFit fit_power_decay(const std::vector<int>& sizes, const std::vector<double>& values);

Report flip_limit_defect(const Mat& a, const Mat& b, const Mat& rho, const Mat& sigma,
                         const std::vector<int>& sizes, double t = 1.0);
// ||j_N1(a) j_N1(b) - j_N2(a (x) b)|| and ||[j_N1 a, j_N1 b]|| per N.
Report product_defect(const Mat& a, const Mat& b, const std::vector<int>& sizes);
Report bracket_report(const std::vector<int>& sizes);
Report gradient_report(double step = 1e-5);

struct ExperimentConfig {
  std::string experiment = "all";
  int n_max = 8;
};
Report mean_field_experiment(const ExperimentConfig& config);

}  // namespace limitflow::mean_field
