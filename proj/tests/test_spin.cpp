#include <doctest.h>

#include "limitflow/rng.hpp"
#include "limitflow/spin_chain.hpp"

using namespace limitflow;
using namespace limitflow::spin;

TEST_SUITE("spin_chain") {
  TEST_CASE("two-site open Ising Hamiltonian") {
    const Mat h = local_hamiltonian(InteractionSpec::ising(1.0, 0.7), 2, Boundary::open);
    const Mat i2 = Mat::Identity(2, 2);
    const Mat oracle =
        -kron(pauli_z(), pauli_z()) - 0.7 * (kron(pauli_x(), i2) + kron(i2, pauli_x()));
    CHECK(max_abs(Mat(h - oracle)) < 1e-15);
  }

  TEST_CASE("boundary terms are the wrap bonds, with flipped sign when antiperiodic") {
    const auto spec = InteractionSpec::ising(1.0, 1.0);
    const int l = 4;
    const Mat wrap = embed(kron(pauli_z(), pauli_z()), {site_index(l, 1), site_index(l, -2)}, l);
    const Mat per = local_hamiltonian(spec, l, Boundary::periodic) - local_hamiltonian(spec, l, Boundary::open);
    const Mat anti = local_hamiltonian(spec, l, Boundary::antiperiodic) - local_hamiltonian(spec, l, Boundary::open);
    CHECK(max_abs(Mat(per + wrap)) < 1e-14);
    CHECK(max_abs(Mat(anti - wrap)) < 1e-14);
    CHECK(max_abs(Mat(boundary_term(spec, l, Boundary::periodic) - per)) < 1e-14);
  }

  TEST_CASE("derivation equals the dense commutator and obeys its bound") {
    const auto spec = InteractionSpec::ising(1.0, 0.8);
    const int l = 6;
    const Mat a_full = embed_block(pauli_x(), 0, l);
    const Derivation d = derivation_apply(spec, pauli_x(), 0, l);
    const Mat h = local_hamiltonian(spec, l, Boundary::open);
    CHECK(max_abs(Mat(d.value - kI * commutator(h, a_full))) < 1e-12);
    CHECK(d.norm <= d.bound);
  }

  TEST_CASE("derivation stabilizes exactly once the cube contains the interaction range") {
    const auto spec = InteractionSpec::ising(1.0, 0.8);
    const Derivation d4 = derivation_apply(spec, pauli_z(), 0, 4);
    const Derivation d8 = derivation_apply(spec, pauli_z(), 0, 8);
    const SoftSystem sys = spin_system({4, 8, 10});
    CHECK(max_abs(Mat(sys.apply(1, 0, d4.value) - d8.value)) == 0.0);
  }

  TEST_CASE("Heisenberg evolution agrees with the dense exponential") {
    const auto spec = InteractionSpec::ising(1.0, 1.0);
    const Mat a = embed_block(pauli_x(), 0, 6);
    for (Boundary bc : {Boundary::open, Boundary::periodic}) {
      const Mat u = heisenberg_evolve(spec, 6, bc, 0.5, a);
      CHECK(max_abs(Mat(u - heisenberg_evolve_expm(spec, 6, bc, 0.5, a))) < 1e-10);
      CHECK(operator_norm(u) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("cube embeddings form a strict system with exact basic nets") {
    const SoftSystem sys = spin_system({2, 4, 6});
    CounterRng rng(1);
    const Mat x = rng.complex_gaussian(4, 4);
    const ConvergenceReport c = jconvergence_diagnostic(sys, make_basic_net_at(sys, 0, x));
    for (const auto& d : c.defect) CHECK(d.value == 0.0);
    CHECK(max_abs(Mat(sys.apply(2, 0, x) - sys.apply(2, 1, sys.apply(1, 0, x)))) == 0.0);
  }

  TEST_CASE("invalid lengths and boundary names are rejected") {
    CHECK_THROWS(local_hamiltonian(InteractionSpec::ising(1.0, 1.0), 12, Boundary::open));
    CHECK_THROWS(boundary_from_string("twisted"));
  }

  TEST_CASE("decay profile is finite for finite-range interactions") {
    CHECK(decay_profile(InteractionSpec::ising(1.0, 1.0), {0.0, 0.5, 1.0}).pass);
  }

  TEST_CASE("boundary defect decreases with the cube length") {
    const Report r = boundary_defect(InteractionSpec::ising(1.0, 1.0), pauli_x(), 0, 0.5, {4, 6, 8},
                                     {Boundary::open, Boundary::periodic});
    CHECK(r.pass);
  }
}
