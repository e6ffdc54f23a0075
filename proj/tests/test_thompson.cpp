#include <doctest.h>

#include <cmath>
#include <string>

#include "limitflow/rng.hpp"
#include "limitflow/thompson.hpp"

using namespace limitflow;
using namespace limitflow::thompson;

TEST_SUITE("thompson") {
  TEST_CASE("identity acts as the identity") {
    CounterRng rng(1);
    const CellVector xi{3, rng.complex_gaussian(8, 1)};
    const CellVector y = act(PLMap::identity(), xi);
    CHECK(y.scale == 3);
    CHECK(max_abs(Mat(y.coeffs - xi.coeffs)) == 0.0);
  }

  TEST_CASE("generator on the constant function gives the explicit two-block rescaling") {
    // Constant 1 at scale 2: each coefficient is the cell value times 2^-1.
    const CellVector one{2, Mat::Constant(4, 1, 0.5)};
    const CellVector y = act(PLMap::generator_a(), one);
    REQUIRE(y.scale == 3);
    const double c = std::pow(2.0, -1.5);
    const double values[8] = {std::sqrt(0.5), std::sqrt(0.5), std::sqrt(0.5), std::sqrt(0.5), 1.0, 1.0,
                              std::sqrt(2.0), std::sqrt(2.0)};
    for (int i = 0; i < 8; ++i) CHECK(std::abs(y.coeffs(i, 0) - values[i] * c) < 1e-15);
    CHECK(y.coeffs.norm() == doctest::Approx(1.0));
  }

  TEST_CASE("inverse and group identities") {
    const PLMap a = PLMap::generator_a(), b = PLMap::generator_b();
    CHECK(a.after(a.inverse()) == PLMap::identity());
    CHECK(b.inverse().after(b) == PLMap::identity());
    CounterRng rng(2);
    const int n = a.resolving_scale();
    const CellVector xi{n, rng.complex_gaussian(Eigen::Index(1) << n, 2)};
    CHECK(distance(act_lifted(a.inverse(), act(a, xi)), xi) < 1e-12);
  }

  TEST_CASE("composition of actions is the action of the composition") {
    const PLMap a = PLMap::generator_a(), b = PLMap::generator_b();
    CounterRng rng(3);
    const PLMap ab = a.after(b);
    const int n = std::max(ab.resolving_scale(), b.resolving_scale());
    const CellVector xi{n, rng.complex_gaussian(Eigen::Index(1) << n, 1)};
    CHECK(distance(act_lifted(ab, xi), act_lifted(a, act_lifted(b, xi))) < 1e-12);
    CHECK(std::abs(ab(0.25) - a(b(0.25))) == 0.0);
  }

  TEST_CASE("unresolvable scale is refused with the minimal resolving scale") {
    const PLMap b = PLMap::generator_b();
    CHECK(b.resolving_scale() == 3);
    try {
      act(b, CellVector{1, Mat::Zero(2, 1)});
      FAIL("expected refusal");
    } catch (const Refused& e) {
      CHECK(std::string(e.what()).find("minimal resolving scale is 3") != std::string::npos);
    }
  }

  TEST_CASE("maps with non-dyadic slopes are rejected") {
    PLMap bad{{{0.0, 0.0}, {0.5, 0.75}, {1.0, 1.0}}};
    CHECK_THROWS(bad.validate());
  }

  TEST_CASE("Haar embedding is isometric") {
    CounterRng rng(4);
    const CellVector xi{2, rng.complex_gaussian(4, 1)};
    CHECK(haar_embed(xi, 6).coeffs.norm() == doctest::Approx(xi.coeffs.norm()).epsilon(1e-14));
  }

  TEST_CASE("sampled group elements pass the full report") {
    const Report r = thompson_report();
    CHECK(r.pass);
    CHECK(r.value("unitarity_gap") < 1e-12);
    CHECK(r.value("composition_gap") < 1e-12);
  }
}
