#include <doctest.h>

#include <cmath>

#include "limitflow/inductive.hpp"
#include "limitflow/rng.hpp"

using namespace limitflow;

namespace {

Mat taylor_exp(const Mat& a, int terms = 60) {
  Mat sum = Mat::Identity(a.rows(), a.cols()), term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * a / double(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("matrix exponential agrees with a Taylor series oracle") {
    CounterRng rng(1);
    for (double scale : {0.1, 1.0, 3.0}) {
      const Mat a = scale * rng.complex_gaussian(6, 6) / 3.0;
      CHECK(max_abs(Mat(expm(a) - taylor_exp(a, 120))) < 1e-11 * std::max(1.0, max_abs(taylor_exp(a, 120))));
    }
  }

  TEST_CASE("exp of a skew-hermitian matrix is unitary and matches the spectral form") {
    CounterRng rng(2);
    const Mat g = rng.complex_gaussian(5, 5);
    const Mat h = 0.5 * (g + g.adjoint());
    const Mat u = expm(Mat(-kI * 0.7 * h));
    CHECK(max_abs(Mat(u.adjoint() * u - Mat::Identity(5, 5))) < 1e-12);
    CHECK(max_abs(Mat(unitary_from_hermitian(h, 0.7) - u)) < 1e-12);
  }

  TEST_CASE("expm_apply matches the dense exponential") {
    CounterRng rng(3);
    const Mat a = rng.complex_gaussian(8, 8) / 2.0;
    const Mat x = rng.complex_gaussian(8, 2);
    const Mat y = expm_apply([&](const Mat& v) { return Mat(a * v); }, x, 1.3, operator_norm(a));
    CHECK(max_abs(Mat(y - expm(Mat(1.3 * a)) * x)) < 1e-10);
  }

  TEST_CASE("norms on simple matrices") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -2.0;
    CHECK(trace_norm(d) == doctest::Approx(3.0));
    CHECK(operator_norm(d) == doctest::Approx(2.0));
    CHECK(frobenius_norm(d) == doctest::Approx(std::sqrt(5.0)));
    CHECK(kron(pauli_x(), Mat::Identity(3, 3)).rows() == 6);
    CHECK(max_abs(Mat(commutator(pauli_x(), pauli_y()) - 2.0 * kI * pauli_z())) < 1e-15);
  }

  TEST_CASE("tail verdict rule") {
    CHECK(tail_verdict({0.5, 0.1, 0.01, 0.001}, 1e-2) == Verdict::convergent);
    CHECK(tail_verdict({0.5, 0.5, 0.5}, 1e-2) == Verdict::divergent);
    CHECK(tail_verdict({0.5, 0.3, 0.2}, 1e-2) == Verdict::inconclusive);
    CHECK(tail_verdict({}, 1e-2) == Verdict::inconclusive);
  }

  TEST_CASE("basic nets of strict systems have identically zero defects") {
    CounterRng rng(4);
    std::vector<LevelSpace> levels;
    std::vector<ConnectingMap> steps;
    for (int i = 0; i < 5; ++i) levels.push_back(LevelSpace::vectors(3 + i));
    for (int i = 0; i < 4; ++i) {
      // Isometric inclusion C^k -> C^{k+1}.
      Mat m = Mat::Zero(4 + i, 3 + i);
      m.topRows(3 + i) = Mat::Identity(3 + i, 3 + i);
      steps.push_back(ConnectingMap::from_matrix(m, levels[i], levels[i + 1]));
    }
    const SoftSystem sys = SoftSystem::from_steps(ScaleChain::integers(0, 4), levels, steps);
    const ConvergenceReport c = jconvergence_diagnostic(sys, make_basic_net_at(sys, 1, rng.complex_gaussian(4, 1)));
    // Entries below the starting level are zero, so only pairs from level 1 on vanish.
    for (const auto& d : c.defect)
      if (d.m >= 1.0) CHECK(d.value == 0.0);
    CHECK(c.verdict == Verdict::convergent);
    const Report soft = soft_transitivity_defect(sys, {{0, rng.complex_gaussian(3, 1)}});
    CHECK(soft.value("max_defect") == 0.0);
  }

  TEST_CASE("null and oscillating nets on a constant system") {
    const SoftSystem sys = SoftSystem::constant(ScaleChain::integers(0, 7), LevelSpace::vectors(2));
    Mat e = Mat::Zero(2, 1);
    e(0, 0) = 1.0;
    ElementNet null_net, osc;
    for (int i = 0; i < 8; ++i) {
      null_net.entries.push_back(std::ldexp(1.0, -3 * i) * e);
      osc.entries.push_back((i % 2 ? -1.0 : 1.0) * e);
    }
    const ConvergenceReport n = jconvergence_diagnostic(sys, null_net);
    CHECK(n.verdict == Verdict::convergent);
    CHECK(tail_seminorm(sys, null_net) < 1e-4);
    CHECK(jconvergence_diagnostic(sys, osc).verdict == Verdict::divergent);
  }

  TEST_CASE("shape mismatch is rejected") {
    const SoftSystem sys = SoftSystem::constant(ScaleChain::integers(0, 3), LevelSpace::vectors(2));
    ElementNet bad;
    for (int i = 0; i < 4; ++i) bad.entries.push_back(Mat::Zero(3, 1));
    CHECK_THROWS_AS(jconvergence_diagnostic(sys, bad), ShapeError);
  }

  TEST_CASE("counter-based generator is reproducible and order independent") {
    CounterRng a(42), b(42);
    CHECK(max_abs(Mat(a.complex_gaussian(3, 3) - b.complex_gaussian(3, 3))) == 0.0);
    CHECK(CounterRng(42).substream(5).next_u64() == CounterRng(42).substream(5).next_u64());
    CHECK(CounterRng(42).substream(5).next_u64() != CounterRng(42).substream(6).next_u64());
  }

  TEST_CASE("report serialization is deterministic") {
    Report r;
    r.name = "x";
    r.values["b"] = 0.1;
    r.values["a"] = 1.0 / 3.0;
    Table t;
    t.columns = {"k", "v"};
    t.add({1.0, 0.25});
    r.tables["t"] = t;
    CHECK(r.to_json().dump() == r.to_json().dump());
    CHECK(r.csv_files().at("x.t.csv") == "k,v\n1,0.25\n");
  }
}
