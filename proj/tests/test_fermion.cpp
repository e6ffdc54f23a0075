#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "limitflow/fermion_rg.hpp"
#include "limitflow/rng.hpp"

using namespace limitflow;
using namespace limitflow::fermion;

namespace {

// Position-space multiplier by explicit DFT sums (no FFT).
Mat dft_multiplier(const Lattice& lat, const Symbol& symbol, const Mat& psi) {
  const Eigen::Index n = lat.sites();
  Mat out = Mat::Zero(n, 2);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Mat s = symbol(lat.momentum(j));
    Mat hat = Mat::Zero(1, 2);
    for (Eigen::Index x = 0; x < n; ++x) hat += std::exp(-kI * (2.0 * kPi * double(j * x) / double(n))) * psi.row(x);
    const Mat shat = hat * s.transpose();
    for (Eigen::Index x = 0; x < n; ++x)
      out.row(x) += std::exp(kI * (2.0 * kPi * double(j * x) / double(n))) * shat / double(n);
  }
  return out;
}

}  // namespace

TEST_SUITE("fermion_rg") {
  TEST_CASE("Haar step maps delta_x to (delta_2x + delta_2x+1)/sqrt2") {
    Mat d = Mat::Zero(8, 1);
    d(3, 0) = 1.0;
    const Mat out = wavelet_step(FilterSpec::haar(), d);
    Mat oracle = Mat::Zero(16, 1);
    oracle(6, 0) = oracle(7, 0) = 1.0 / std::sqrt(2.0);
    CHECK(max_abs(Mat(out - oracle)) < 1e-16);
    CHECK(max_abs(wavelet_step(FilterSpec::haar(), Mat::Zero(8, 2))) == 0.0);
  }

  TEST_CASE("configured filters are orthonormal isometries with exact transitivity") {
    for (const auto& f : {FilterSpec::haar(), FilterSpec::from_file(data_dir() + "/filters/d4.taps"),
                          FilterSpec::named("db4")}) {
      CHECK(f.orthonormality_defect() < 1e-12);
      const Report r = isometry_report(f, {2, 3, 4, 5});
      CHECK(r.pass);
      CHECK(r.value("transitivity_gap") <= 1e-12);
      CHECK(r.value("basic_net_max_defect") == 0.0);
    }
  }

  TEST_CASE("tap file loaded from the data directory matches the closed-form D4 taps") {
    const FilterSpec a = FilterSpec::from_file(data_dir() + "/filters/d4.taps"), b = FilterSpec::d4();
    REQUIRE(a.taps.size() == b.taps.size());
    for (std::size_t i = 0; i < a.taps.size(); ++i) CHECK(std::abs(a.taps[i] - b.taps[i]) < 1e-15);
  }

  TEST_CASE("non-orthonormal filters are rejected") {
    FilterSpec bad{"bad", {1.0, 1.0}};
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(fermion_system(bad, {2, 3, 4}));
  }

  TEST_CASE("data directory can be overridden from the environment") {
    const auto dir = std::filesystem::temp_directory_path() / "limitflow_taps_test";
    std::filesystem::create_directories(dir / "filters");
    std::ofstream(dir / "filters" / "mine.taps") << "# haar copy\n0.7071067811865476\n0.7071067811865476 0.0\n";
    setenv("LIMITFLOW_DATA_DIR", dir.c_str(), 1);
    const FilterSpec f = FilterSpec::named("mine");
    unsetenv("LIMITFLOW_DATA_DIR");
    CHECK(f.taps.size() == 2);
    CHECK(f.orthonormality_defect() < 1e-12);
  }

  TEST_CASE("kernel structure") {
    const Lattice lat{3};
    const Couplings massless;
    CHECK(max_abs(kernel(lat, massless, 0.0)) == 0.0);
    const Mat h = kernel(lat, Couplings{1.0, 1.0}, 1.3);
    CHECK(max_abs(Mat(h - h.adjoint())) == 0.0);
    CHECK(std::abs(h.trace()) == 0.0);
    // Critical dispersion 2|sin(eps k / 2)|.
    for (double k : {0.5, 1.0, 2.5})
      CHECK(dispersion(lat, massless, k) == doctest::Approx(2.0 * std::abs(std::sin(lat.spacing() * k / 2.0))));
  }

  TEST_CASE("rescaled kernel converges to -k sigma_z at order eps") {
    const double k = 1.0;
    const Couplings c;
    for (int n = 6; n <= 10; ++n) {
      const Lattice lat{n};
      const double d = max_abs(Mat(rescaled_kernel(lat, c, k) - limit_kernel(c, k)));
      // Taylor remainders: |sin(ek)/e - k| <= e^2 k^3/6 and |(cos(ek)-1)/e| <= e k^2/2.
      CHECK(d <= lat.spacing() * k * k / 2.0 + 1e-15);
    }
    Mat oracle = Mat::Zero(2, 2);
    oracle(0, 0) = -k;
    oracle(1, 1) = k;
    CHECK(max_abs(Mat(limit_kernel(c, k) - oracle)) == 0.0);
  }

  TEST_CASE("kernel and dispersion halving ratios") {
    const double l = Lattice{}.length();
    CHECK(kernel_report(Couplings{}, {4, 5, 6, 7, 8}, 8.0 * kPi / l).pass);
    CHECK(dispersion_report(Couplings{1.0, 1.0}, {4, 5, 6, 7, 8}, 2.0 * kPi / l).pass);
  }

  TEST_CASE("ground projections and the Hardy convention") {
    Mat hardy = Mat::Zero(2, 2);
    hardy(1, 1) = 1.0;
    CHECK(max_abs(Mat(limit_projection_symbol(Couplings{}, kPi) - hardy)) == 0.0);
    const Projection p0 = ground_projection(kernel(Lattice{3}, Couplings{}, 0.0));
    CHECK(p0.gapless);
    CHECK(max_abs(Mat(p0.p - hardy)) == 0.0);
    CHECK(projection_report({2, 3}).pass);
  }

  TEST_CASE("FFT multiplier matches explicit DFT sums") {
    const Lattice lat{1};
    CounterRng rng(1);
    const Mat psi = rng.complex_gaussian(lat.sites(), 2);
    const Couplings c{1.0, 1.0};
    const Symbol s = [&](double k) { return lattice_projection_symbol(lat, c, k); };
    CHECK(max_abs(Mat(apply_multiplier(lat, s, psi) - dft_multiplier(lat, s, psi))) < 1e-12);
  }

  TEST_CASE("covariance at n = m is the lattice projection") {
    const Lattice lat{2};
    const Couplings c;
    const Mat cov = renormalized_covariance(FilterSpec::haar(), 2, 2, c);
    CHECK(max_abs(Mat(cov * cov - cov)) < 1e-12);
    CHECK(max_abs(Mat(cov - cov.adjoint())) < 1e-12);
    CHECK(std::abs(cov.trace().real() / double(cov.rows()) - 0.5) < 1e-2);
  }

  TEST_CASE("covariance trails are Cauchy and match the continuum") {
    const Report r = rg_flow_report(FilterSpec::named("db4"), {2, 3, 4, 5, 6, 7, 8, 9}, 2, Couplings{});
    CHECK(r.pass);
    CHECK(r.value("continuum_gap") < 1e-2);
    CHECK(std::abs(r.value("filling") - 0.5) < 1e-2);
  }

  TEST_CASE("Haar covariance entry (0,0) has an O(2^-n) increment trend") {
    std::vector<double> inc;
    Mat prev;
    for (int n = 2; n <= 8; ++n) {
      const Mat cov = renormalized_covariance(FilterSpec::haar(), n, 2, Couplings{});
      if (prev.size()) inc.push_back(std::abs(cov(0, 0) - prev(0, 0)));
      prev = cov;
    }
    for (std::size_t i = 1; i < inc.size(); ++i) CHECK(inc[i] <= inc[i - 1] + 1e-14);
  }

  TEST_CASE("one-particle evolution is unitary and trivial at t = 0") {
    const Lattice lat{4};
    const Mat xi = smooth_probe(lat);
    CHECK(one_particle_evolve(lat, Couplings{}, 0.7, xi).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_abs(Mat(one_particle_evolve(lat, Couplings{}, 0.0, xi) - xi)) == 0.0);
    const Report d0 = dynamics_defect(FilterSpec::named("db4"), {2, 3, 4, 5}, 0.0, Couplings{});
    CHECK(d0.value("max_defect") == 0.0);
  }

  TEST_CASE("dynamics defect halves per scale step") {
    for (double m0 : {0.0, 1.0}) {
      const Report r = dynamics_defect(FilterSpec::named("db4"), {2, 3, 4, 5, 6, 7, 8, 9}, 0.5, Couplings{m0, 1.0});
      CHECK(r.pass);
    }
  }

  TEST_CASE("multiresolution nesting") {
    CHECK(nesting_report(FilterSpec::named("db4"), {2, 3, 4, 5}).pass);
    CHECK(nesting_report(FilterSpec::haar(), {2, 3, 4, 5}).pass);
  }
}
