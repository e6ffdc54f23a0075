#pragma once

#include <functional>
#include <string>
#include <vector>

#include "limitflow/inductive.hpp"

namespace limitflow::fermion {

// Dyadic lattice at scale n: 2 L_n sites of spacing eps_n = 2^-n eps0 on a
// circle of circumference 2L, L = eps0 L0. Site index i sits at
// eps_n (i - L_n); momenta follow FFT ordering.
struct Lattice {
  int n = 0;
  double eps0 = 1.0;
  int l0 = 2;

  Eigen::Index half_sites() const { return Eigen::Index(l0) << n; }
  Eigen::Index sites() const { return 2 * half_sites(); }
  double spacing() const;
  double length() const { return eps0 * l0; }
  double position(Eigen::Index i) const { return spacing() * double(i - half_sites()); }
  double momentum(Eigen::Index j) const;
};

// Data directory: LIMITFLOW_DATA_DIR from the environment, else the build default.
std::string data_dir();

struct FilterSpec {
  std::string name;
  std::vector<cplx> taps;

  static FilterSpec haar();
  static FilterSpec d4();
  static FilterSpec from_file(const std::string& path);
  // haar, d4, or a tap file from the data directory (e.g. db4).
  static FilterSpec named(const std::string& name);

  double orthonormality_defect() const;
  void validate(double tol = 1e-12) const;
};

// One refinement step (rows N -> 2N, indices wrap on the circle).
Mat wavelet_step(const FilterSpec& filter, const Mat& psi);
// v_nm psi for n >= m.
Mat wavelet_map(const FilterSpec& filter, const Mat& psi, int m, int n);
Mat wavelet_adjoint_step(const FilterSpec& filter, const Mat& psi);

SoftSystem fermion_system(const FilterSpec& filter, const std::vector<int>& scales, int components = 2,
                          double eps0 = 1.0, int l0 = 2);

struct Couplings {
  double m0 = 0.0;
  double coupling = 1.0;

  double lambda(const Lattice& lat) const { return lat.spacing() * m0; }
};

Mat kernel(const Lattice& lat, const Couplings& c, double k);
Mat rescaled_kernel(const Lattice& lat, const Couplings& c, double k);
Mat limit_kernel(const Couplings& c, double k);
double dispersion(const Lattice& lat, const Couplings& c, double k);
double rescaled_dispersion(const Lattice& lat, const Couplings& c, double k);
double limit_dispersion(const Couplings& c, double k);

struct Projection {
  Mat p;
  bool gapless = false;
};
// Spectral projection onto the positive part of a traceless hermitian 2x2
// kernel, with sign(0) = 1 at gapless points.
Projection ground_projection(const Mat& h);

using Symbol = std::function<Mat(double k)>;
// Fourier multiplier with a 2x2 symbol applied to psi (rows = sites,
// columns = spinor components).
Mat apply_multiplier(const Lattice& lat, const Symbol& symbol, const Mat& psi);

Mat lattice_projection_symbol(const Lattice& lat, const Couplings& c, double k);
Mat limit_projection_symbol(const Couplings& c, double k);

// (v_nm (x) 1)^dag P_n (v_nm (x) 1) on level m (x) C^2, basis ordered
// (site, component). With continuum set, P_n is replaced by the limit
// projection sampled at scale n.
Mat renormalized_covariance(const FilterSpec& filter, int n, int m, const Couplings& c, bool continuum = false,
                            double eps0 = 1.0, int l0 = 2);

Mat one_particle_evolve(const Lattice& lat, const Couplings& c, double t, const Mat& psi);
Mat continuum_evolve(const Lattice& lat, const Couplings& c, double t, const Mat& psi);

// Smooth two-component probe at scale l, unit norm.
Mat smooth_probe(const Lattice& lat, double width = 0.3);

Report kernel_report(const Couplings& c, const std::vector<int>& scales, double k);
Report dispersion_report(const Couplings& c, const std::vector<int>& scales, double k);
Report projection_report(const std::vector<int>& scales);
Report isometry_report(const FilterSpec& filter, const std::vector<int>& scales, std::uint64_t seed = 11);
Report nesting_report(const FilterSpec& filter, const std::vector<int>& scales, std::uint64_t seed = 13);
Report rg_flow_report(const FilterSpec& filter, const std::vector<int>& scales, int m, const Couplings& c);
Report jstar_report(const FilterSpec& filter, const std::vector<int>& scales, const Couplings& c);
Report dynamics_defect(const FilterSpec& filter, const std::vector<int>& scales, double t, const Couplings& c);

struct ExperimentConfig {
  std::string filter = "db4";
  std::string taps_file;
  double m0 = 0.0;
  std::vector<int> chain = {2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> t_grid = {0.5};
  std::string experiment = "all";
};
FilterSpec resolve_filter(const ExperimentConfig& config);
Report fermion_experiment(const ExperimentConfig& config);

}  // namespace limitflow::fermion
