#include <doctest.h>

#include <cmath>

#include "limitflow/classical_limit.hpp"
#include "limitflow/rng.hpp"

using namespace limitflow;
using namespace limitflow::classical;

namespace {

PhaseSpaceGrid small_grid() { return {5.0, 0.05}; }

double gaussian_density(double q, double p, double q0, double p0, double var) {
  const double dq = q - q0, dp = p - p0;
  return std::exp(-(dq * dq + dp * dp) / (2.0 * var)) / (2.0 * kPi * var);
}

}  // namespace

TEST_SUITE("classical") {
  TEST_CASE("Fock levels enforce the cutoff floor") {
    CHECK_THROWS(FockLevel::make(0.1, 8));
    const FockLevel f = FockLevel::make(0.1, 64);
    CHECK(f.validity_radius() == doctest::Approx(std::sqrt(0.1 * 64)));
  }

  TEST_CASE("coherent vectors are normalized up to the Poisson tail") {
    const FockLevel f = FockLevel::make(0.2, 48);
    const Vec v = coherent_vector(f, 0.5, -0.3);
    CHECK(std::abs(v.squaredNorm() + coherent_tail_mass(f, 0.5, -0.3) - 1.0) < 1e-12);
    CHECK_THROWS_AS(coherent_vector(f, 10.0, 0.0), Refused);
  }

  TEST_CASE("Husimi function of a coherent state is the Gaussian of variance hbar") {
    const double hbar = 0.2, q0 = 0.3, p0 = -0.2;
    const FockLevel f = FockLevel::make(hbar, 48);
    const Vec v = coherent_vector(f, q0, p0);
    const Mat rho = v * v.adjoint();
    const PhaseSpaceGrid g = small_grid();
    const GridFunction q = dequantize(f, rho, g);
    const GridFunction oracle =
        GridFunction::sample(g, [&](double x, double y) { return cplx(gaussian_density(x, y, q0, p0, hbar)); });
    CHECK(l1_distance(q, oracle) < 1e-6);
    CHECK(std::abs(q.integral() - 1.0) < 1e-6);
  }

  TEST_CASE("Gaussian convolution adds variances") {
    const PhaseSpaceGrid g = small_grid();
    const GridFunction f = GridFunction::sample(g, [](double x, double y) { return cplx(gaussian_density(x, y, 0.2, 0.1, 0.1)); });
    const GridFunction conv = gaussian_convolution(f, 0.2);
    const GridFunction oracle =
        GridFunction::sample(g, [](double x, double y) { return cplx(gaussian_density(x, y, 0.2, 0.1, 0.3)); });
    CHECK(l1_distance(conv, oracle) < 1e-6);
  }

  TEST_CASE("quantization preserves mass and positivity") {
    const FockLevel f = FockLevel::make(0.2, 48);
    const PhaseSpaceGrid g = small_grid();
    const GridFunction gauss = GridFunction::sample(g, Gaussian{0.2, -0.1, 0.2}.function());
    const Quantized qz = quantize(f, gauss);
    CHECK(std::abs(qz.rho.trace() - gauss.integral()) < 1e-6);
    CHECK(is_hermitian(qz.rho, 1e-12));
    Eigen::SelfAdjointEigenSolver<Mat> es(qz.rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }

  TEST_CASE("heat transform identity holds below the threshold") {
    const FockLevel f = FockLevel::make(0.2, 48);
    const HeatDefect d = heat_transform_defect(f, Gaussian{0.1, 0.2, 0.3}.function(), small_grid());
    CHECK(d.pass);
    CHECK(d.vs_convolution < d.threshold);
  }

  TEST_CASE("canonical commutation away from the cutoff") {
    const FockLevel f = FockLevel::make(0.1, 32);
    const CanonicalOps ops = canonical_operators(f);
    const Mat c = commutator(ops.x, ops.p);
    const Eigen::Index k = 24;
    CHECK(max_abs(Mat(c.topLeftCorner(k, k) - kI * 0.1 * Mat::Identity(k, k))) < 1e-12);
  }

  TEST_CASE("Lindbladian is trace preserving and dual to its adjoint") {
    const FockLevel f = FockLevel::make(0.2, 24);
    const LindbladOperator l(GaussianLindbladSpec::damped_oscillator(0.3), f);
    CounterRng rng(1);
    const Mat g = rng.complex_gaussian(24, 24);
    const Mat rho = g * g.adjoint() / (g * g.adjoint()).trace();
    const Mat x = rng.complex_gaussian(24, 24);
    CHECK(std::abs(l.apply(rho).trace()) < 1e-10);
    CHECK(std::abs((x * l.apply(rho)).trace() - (l.adjoint_apply(x) * rho).trace()) < 1e-9);
    const Mat dense = lindblad_generator(GaussianLindbladSpec::damped_oscillator(0.3), f);
    CHECK(max_abs(Mat(unvectorize(dense * vectorize(rho), 24, 24) - l.apply(rho))) < 1e-10);
  }

  TEST_CASE("dense Lindblad generator respects its cap") {
    CHECK_THROWS_AS(lindblad_generator(GaussianLindbladSpec::harmonic(), FockLevel::make(0.1, 64)), CapExceeded);
  }

  TEST_CASE("oscillator flow is a rotation; damping contracts uniformly") {
    const ClassicalFlow h = classical_flow(GaussianLindbladSpec::harmonic(), 1.0);
    CHECK(h.determinant == doctest::Approx(1.0));
    const RMat ff = h.flow.transpose() * h.flow;
    CHECK((ff - RMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    const ClassicalFlow d = classical_flow(GaussianLindbladSpec::damped_oscillator(0.3), 1.0);
    CHECK(d.determinant == doctest::Approx(std::exp(-0.6)));
  }

  TEST_CASE("oscillator propagator is diagonal with phases t(k + 1/2)") {
    const FockLevel f = FockLevel::make(0.1, 16);
    const Mat u = oscillator_propagator(f, 0.4);
    CHECK(std::abs(u(3, 3) - std::exp(-kI * 0.4 * 3.5)) < 1e-14);
    CHECK(std::abs(u(0, 1)) == 0.0);
  }

  TEST_CASE("bump probe has unit mass and the oscillator bracket integrates to zero") {
    const PhaseSpaceGrid g = small_grid();
    const Bump b;
    CHECK(std::abs(GridFunction::sample(g, b.function()).integral() - 1.0) < 1e-3);
    CHECK(std::abs(GridFunction::sample(g, b.oscillator_bracket()).integral()) < 1e-6);
  }

  TEST_CASE("pushforward by a rotation preserves mass") {
    const PhaseSpaceGrid g = small_grid();
    const ClassicalFlow h = classical_flow(GaussianLindbladSpec::harmonic(), 0.8);
    const GridFunction pushed = pushforward(Gaussian{0.5, 0.0, 0.2}.function(), h.flow, g);
    CHECK(std::abs(pushed.integral() - 1.0) < 1e-6);
    const auto m = pushed.first_moment();
    const RVec z = h.flow * RVec::Unit(2, 0) * 0.5;
    CHECK(m[0] == doctest::Approx(z(0)).epsilon(1e-6));
    CHECK(m[1] == doctest::Approx(z(1)).epsilon(1e-6));
  }
}
