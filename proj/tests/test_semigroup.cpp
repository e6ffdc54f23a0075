#include <doctest.h>

#include <cmath>

#include "limitflow/rng.hpp"
#include "limitflow/runner.hpp"
#include "limitflow/semigroup.hpp"

using namespace limitflow;
using namespace limitflow::semigroup;

namespace {

SoftSystem constant_system(int dim, int levels = 4) {
  return SoftSystem::constant(ScaleChain::integers(0, levels - 1), LevelSpace::vectors(dim));
}

GeneratorNet constant_gen(const Mat& a, std::size_t levels, bool dissipative = true) {
  return GeneratorNet::from_matrices(std::vector<Mat>(levels, a), dissipative);
}

Mat dissipative(CounterRng& rng, int dim) {
  const Mat g = rng.complex_gaussian(dim, dim) / std::sqrt(double(dim));
  const Mat h = rng.complex_gaussian(dim, dim) / std::sqrt(double(dim));
  return Mat(0.5 * (g - g.adjoint())) - 0.5 * Mat(h * h.adjoint()) / double(dim);
}

}  // namespace

TEST_SUITE("semigroup") {
  TEST_CASE("resolvent of -1 at lambda 1 is one half") {
    const SoftSystem sys = constant_system(3);
    const auto gen = constant_gen(-Mat::Identity(3, 3), sys.size());
    CounterRng rng(1);
    const Mat x = rng.complex_gaussian(3, 1);
    const ElementNet y = resolvent_apply(sys, gen, 1.0, make_basic_net_at(sys, 0, x));
    for (const auto& e : y.entries) CHECK(max_abs(Mat(e - 0.5 * x)) < 1e-15);
  }

  TEST_CASE("resolvent of a skew 2x2 generator matches the Neumann series") {
    Mat a(2, 2);
    a << 0.0, 0.3, -0.3, 0.0;
    const SoftSystem sys = constant_system(2);
    const auto gen = constant_gen(a, sys.size());
    const double lambda = 1.0;
    Mat series = Mat::Zero(2, 2), power = Mat::Identity(2, 2);
    for (int k = 0; k < 80; ++k) {
      series += power / std::pow(lambda, k + 1);
      power = power * a;
    }
    Mat e = Mat::Zero(2, 1);
    e(0, 0) = 1.0;
    const ElementNet y = resolvent_apply(sys, gen, lambda, make_basic_net_at(sys, 0, e));
    CHECK(max_abs(Mat(y[0] - series * e)) < 1e-8);
  }

  TEST_CASE("resolvent identity on a seeded dissipative generator") {
    CounterRng rng(2);
    const Mat a = dissipative(rng, 8);
    const SoftSystem sys = constant_system(8);
    const auto gen = constant_gen(a, sys.size());
    const ElementNet x = make_basic_net_at(sys, 0, rng.complex_gaussian(8, 1));
    const cplx l = 1.0, m = 2.5;
    const ElementNet lhs = add(resolvent_apply(sys, gen, l, x), resolvent_apply(sys, gen, m, x), -1.0);
    const ElementNet rhs = scale(resolvent_apply(sys, gen, l, resolvent_apply(sys, gen, m, x)), m - l);
    CHECK(max_abs(Mat(lhs[0] - rhs[0])) < 1e-9);
  }

  TEST_CASE("lambda R(lambda) x approaches x") {
    CounterRng rng(3);
    const Mat a = dissipative(rng, 6);
    const SoftSystem sys = constant_system(6);
    const auto gen = constant_gen(a, sys.size());
    const ElementNet x = make_basic_net_at(sys, 0, rng.complex_gaussian(6, 1));
    double prev = 1e300;
    for (double l : {1.0, 10.0, 100.0}) {
      const double res = (l * resolvent_apply(sys, gen, l, x)[0] - x[0]).norm();
      CHECK(res < prev);
      prev = res;
    }
  }

  TEST_CASE("semigroup law and contraction on a dissipative generator") {
    CounterRng rng(4);
    const Mat a = dissipative(rng, 8);
    const SoftSystem sys = constant_system(8);
    const auto gen = constant_gen(a, sys.size());
    const ElementNet x = make_basic_net_at(sys, 0, rng.complex_gaussian(8, 1));
    const ElementNet st = evolve(sys, gen, 0.7, evolve(sys, gen, 0.4, x));
    CHECK(max_abs(Mat(st[0] - evolve(sys, gen, 1.1, x)[0])) < 1e-9);
    CHECK(evolve(sys, gen, 2.0, x)[0].norm() <= x[0].norm() * (1 + 1e-12));
  }

  TEST_CASE("dissipativity margins") {
    const SoftSystem sys = constant_system(2);
    CounterRng rng(5);
    const std::vector<ElementNet> probes = {make_basic_net_at(sys, 0, rng.complex_gaussian(2, 1))};
    const Report zero = dissipativity_margin(sys, constant_gen(Mat::Zero(2, 2), sys.size()), {0.5, 1.0}, probes);
    CHECK(std::abs(zero.value("min_margin")) < 1e-15);
    CHECK(zero.pass);
    const Report minus = dissipativity_margin(sys, constant_gen(-Mat::Identity(2, 2), sys.size()), {0.5, 1.0}, probes);
    CHECK(minus.value("min_margin") >= 0.0);
    const Report plus =
        dissipativity_margin(sys, constant_gen(Mat(Mat::Identity(2, 2)), sys.size(), false), {0.5, 1.0}, probes);
    CHECK_FALSE(plus.pass);
  }

  TEST_CASE("zero generator leaves nets unchanged") {
    const SoftSystem sys = constant_system(3);
    CounterRng rng(6);
    const ElementNet x = make_basic_net_at(sys, 0, rng.complex_gaussian(3, 1));
    const ElementNet y = evolve(sys, constant_gen(Mat::Zero(3, 3), sys.size()), 1.0, x);
    for (std::size_t i = 0; i < sys.size(); ++i) CHECK(max_abs(Mat(y[i] - x[i])) == 0.0);
  }

  TEST_CASE("uniformly continuous corollary bound") {
    CounterRng rng(7);
    const Mat a = dissipative(rng, 6), e = dissipative(rng, 6);
    const double t = 1.0;
    for (int n = 2; n <= 6; ++n) {
      const Mat an = a + std::ldexp(1.0, -n) * e;
      const double gap = operator_norm(Mat(expm(Mat(t * an)) - expm(Mat(t * a))));
      const double bound = t * operator_norm(Mat(an - a)) *
                           std::exp(t * std::max(operator_norm(an), operator_norm(a)));
      CHECK(gap <= bound);
    }
  }

  TEST_CASE("relative bound fits") {
    CounterRng rng(8);
    const Mat a = rng.complex_gaussian(4, 4);
    const SoftSystem sys = constant_system(4);
    std::vector<ElementNet> probes;
    for (int i = 0; i < 6; ++i) probes.push_back(make_basic_net_at(sys, 0, rng.complex_gaussian(4, 1)));
    const Report half = relative_bound_fit(sys, constant_gen(a, sys.size()), constant_gen(Mat(0.5 * a), sys.size()),
                                           probes, 0.0);
    CHECK(half.value("a_uniform") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half.pass);
    const Report id = relative_bound_fit(sys, constant_gen(a, sys.size()),
                                         constant_gen(Mat(Mat::Identity(4, 4)), sys.size()), probes, 1.0);
    CHECK(id.value("a_uniform") == 0.0);
    CHECK(id.table("fit").rows.front()[2] == doctest::Approx(1.0));
  }

  TEST_CASE("analytic radius of nilpotent and bounded generators is infinite") {
    const SoftSystem sys = constant_system(2);
    Mat nil = Mat::Zero(2, 2);
    nil(0, 1) = 1.0;
    Mat e = Mat::Zero(2, 1);
    e(1, 0) = 1.0;
    CHECK(analytic_radius(sys, constant_gen(nil, sys.size()), make_basic_net_at(sys, 0, e), 6).infinite);
    CHECK(analytic_radius(sys, constant_gen(-Mat::Identity(2, 2), sys.size()), make_basic_net_at(sys, 0, e), 8)
              .infinite);
  }

  TEST_CASE("well-definedness on null nets") {
    const SoftSystem sys = constant_system(3, 6);
    CounterRng rng(9);
    const Mat e = rng.complex_gaussian(3, 1);
    ElementNet eventually_zero, fast_decay;
    for (int i = 0; i < 6; ++i) {
      eventually_zero.entries.push_back(i < 3 ? e : Mat(Mat::Zero(3, 1)));
      fast_decay.entries.push_back(std::ldexp(1.0, -12 * i) * e);
    }
    const Report r = well_definedness_probe(sys, constant_gen(rng.complex_gaussian(3, 3), sys.size(), false),
                                            {zero_net(sys), eventually_zero, fast_decay});
    CHECK(r.pass);
  }

  TEST_CASE("Trotter defects: commuting pair exact, random pair first order") {
    const Report r = runner::trotter_report(7, 16, 1.0, {8, 16, 32, 64});
    CHECK(r.child("commuting").value("max_error") < 1e-10);
    const Report& nc = r.child("non_commuting");
    CHECK(nc.pass);
    for (const auto& row : nc.table("ratios").rows) {
      CHECK(row[1] >= 1.5);
      CHECK(row[1] <= 2.5);
    }
    // error(k) * k bounded above and below.
    const auto errs = nc.table("errors");
    double lo = 1e300, hi = 0.0;
    for (const auto& row : errs.rows) {
      lo = std::min(lo, row[2] * row[0]);
      hi = std::max(hi, row[2] * row[0]);
    }
    CHECK(lo > 0.0);
    CHECK(hi / lo < 2.0);
  }

  TEST_CASE("evolution theorem cross-consistency and counterexample") {
    const Report r = runner::evolution_check_report(7, 16, 10, kTrendTol);
    CHECK(r.child("vanishing_perturbation").pass);
    CHECK(r.child("vanishing_perturbation").value("limit_action_gap") < 1e-8);
    CHECK(r.child("oscillating_perturbation").pass);
  }
}
