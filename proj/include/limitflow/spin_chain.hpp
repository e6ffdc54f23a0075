#pragma once

#include <string>
#include <vector>

#include "limitflow/inductive.hpp"
#include "limitflow/semigroup.hpp"

namespace limitflow::spin {

constexpr int kMaxSites = 10;

// Translation-invariant interaction: each term acts on the sites
// x + offsets[k] with offsets sorted and starting at 0.
struct Term {
  std::vector<int> offsets;
  Mat op;
};

struct InteractionSpec {
  std::vector<Term> terms;

  static InteractionSpec ising(double coupling, double field);
  int range() const;
  void validate() const;
  // p(x) = sum over interaction sets containing x of their norms (bulk site).
  double site_sum() const;
  // sum over sets containing x of exp(lambda * diam) * norm.
  double weighted_sum(double lambda) const;
};

enum class Boundary { open, periodic, antiperiodic };
std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

// Sites of the cube of length L are positions -L/2 .. L/2 - 1, stored at
// indices 0 .. L-1 (position x at index x + L/2).
int site_index(int length, int position);

// op acting on the listed sites (in order) of an L-site chain.
Mat embed(const Mat& op, const std::vector<int>& sites, int length);
// Observable a on a block of consecutive positions starting at `first`.
Mat embed_block(const Mat& a, int first, int length);

Mat local_hamiltonian(const InteractionSpec& spec, int length, Boundary bc);
// H_bc - H_open: supported on the sites within `range` of the boundary.
Mat boundary_term(const InteractionSpec& spec, int length, Boundary bc);

struct Derivation {
  Mat value;  // on the full L-site chain
  double norm = 0.0;
  double bound = 0.0;  // 2 |support| sup p ||a||
};
// i sum_{X touching the block, X inside the cube} [Phi(X), a], computed on
// the smallest window containing the terms and then embedded.
Derivation derivation_apply(const InteractionSpec& spec, const Mat& a, int first, int length);

Report decay_profile(const InteractionSpec& spec, const std::vector<double>& lambdas);

// e^{itH} a e^{-itH} via hermitian eigendecomposition.
Mat heisenberg_evolve(const InteractionSpec& spec, int length, Boundary bc, double t, const Mat& a_full);
// Same evolution through the Pade matrix exponential (independent oracle).
Mat heisenberg_evolve_expm(const InteractionSpec& spec, int length, Boundary bc, double t, const Mat& a_full);

// Strict system of centered cubes with a -> 1 (x) a (x) 1 embeddings.
SoftSystem spin_system(const std::vector<int>& lengths);
// Net of a block observable placed on every cube of the chain.
ElementNet local_net(const std::vector<int>& lengths, const Mat& a, int first);
semigroup::GeneratorNet derivation_generator(const InteractionSpec& spec, const std::vector<int>& lengths,
                                             Boundary bc);

Report boundary_defect(const InteractionSpec& spec, const Mat& a, int first, double t,
                       const std::vector<int>& lengths, const std::vector<Boundary>& bcs);

struct ExperimentConfig {
  double coupling = 1.0;
  double field = 1.0;
  std::vector<Boundary> bcs = {Boundary::open, Boundary::periodic, Boundary::antiperiodic};
  std::string observable = "x";
  std::vector<double> t_grid = {0.5};
  std::vector<int> lengths = {4, 6, 8, 10};
  int k_max = 8;
};
Mat single_site_observable(const std::string& name);
Report spin_chain_experiment(const ExperimentConfig& config);

}  // namespace limitflow::spin
