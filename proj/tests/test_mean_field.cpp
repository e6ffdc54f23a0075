#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "limitflow/mean_field.hpp"
#include "limitflow/rng.hpp"

using namespace limitflow;
using namespace limitflow::mean_field;

TEST_SUITE("mean_field") {
  TEST_CASE("symmetrized observables are exactly permutation invariant") {
    CounterRng rng(1);
    const Mat a = rng.complex_gaussian(4, 4);
    const Mat s = symmetrize(4, a, 2);
    std::vector<int> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      CHECK(max_abs(Mat(permute_sites(s, 4, perm) - s)) == 0.0);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  TEST_CASE("symmetrizer fixes the identity and is idempotent on one-site averages") {
    CHECK(max_abs(Mat(symmetrize(3, Mat::Identity(2, 2), 1) - Mat::Identity(8, 8))) < 1e-15);
    const Mat s3 = symmetrize(3, pauli_z(), 1);
    CHECK(max_abs(Mat(symmetrize(3, s3, 3) - s3)) < 1e-15);
  }

  TEST_CASE("swapping twice is the identity") {
    CounterRng rng(2);
    const Mat x = rng.complex_gaussian(8, 8);
    CHECK(max_abs(Mat(swap_sites(swap_sites(x, 3, 0, 2), 3, 0, 2) - x)) == 0.0);
  }

  TEST_CASE("product states evaluate symmetrized one-site observables to tr(sigma a)") {
    const Mat sigma = bloch_state({0.3, -0.2, 0.5});
    for (int n = 1; n <= 5; ++n)
      CHECK(std::abs(eval_product_state(sigma, symmetrize(n, pauli_x(), 1), n) - (sigma * pauli_x()).trace()) <
            1e-14);
  }

  TEST_CASE("Bloch grid has 13 states inside the ball") {
    const auto g = bloch_grid();
    CHECK(g.size() == 13);
    for (const auto& r : g) CHECK(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] <= 1.0);
  }

  TEST_CASE("inverse-N extrapolation recovers an exact law") {
    const std::vector<int> n = {2, 3, 4, 5, 6};
    std::vector<cplx> v;
    for (int k : n) v.push_back(2.0 + 3.0 / k);
    const Extrapolation e = extrapolate_inverse_n(n, v);
    CHECK(std::abs(e.limit - 2.0) < 1e-12);
    CHECK(std::abs(e.slope - 3.0) < 1e-12);
  }

  TEST_CASE("flip generator annihilates bulk observables exactly") {
    CounterRng rng(3);
    for (int n = 3; n <= 5; ++n) {
      const Mat bulk = symmetrize(n, rng.complex_gaussian(4, 4), 2);
      CHECK(max_abs(flip_apply(bulk, n)) == 0.0);
    }
  }

  TEST_CASE("dense flip generator matches its action") {
    CounterRng rng(4);
    const Mat x = rng.complex_gaussian(8, 8);
    const Mat g = flip_generator(3);
    CHECK(max_abs(Mat(unvectorize(g * vectorize(x), 8, 8) - flip_apply(x, 3))) < 1e-12);
  }

  TEST_CASE("size caps") {
    CHECK_THROWS_AS(mean_field_system(9), CapExceeded);
    CHECK_THROWS_AS(flip_generator(7), CapExceeded);
    ExperimentConfig c;
    c.n_max = 12;
    CHECK_THROWS_AS(mean_field_experiment(c), CapExceeded);
  }

  TEST_CASE("gradient of the mean-field energy matches finite differences") {
    CHECK(gradient_report().pass);
  }

  TEST_CASE("Bloch bracket reproduces {x1, x2} = -2 x3") {
    const Report r = bracket_report({2, 3, 4, 5, 6});
    CHECK(r.pass);
  }
}
