#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "limitflow/linalg.hpp"
#include "limitflow/report.hpp"

namespace limitflow::thompson {

// Piecewise-linear homeomorphism of [0,1] with dyadic breakpoints and slopes
// that are powers of two, stored as its graph vertices (x, f(x)). Dyadic
// rationals with small denominators are exact in double.
struct PLMap {
  std::vector<std::pair<double, double>> points;

  static PLMap identity();
  // Slopes 2, 1, 1/2 on [0,1/4], [1/4,1/2], [1/2,1].
  static PLMap generator_a();
  // Identity on [0,1/2], then a half-size copy of generator_a.
  static PLMap generator_b();

  void validate() const;
  double operator()(double x) const;
  PLMap inverse() const;
  // (*this) after g.
  PLMap after(const PLMap& g) const;
  // Slope exponent on each linear piece.
  std::vector<int> exponents() const;
  int exponent_at(double x) const;
  int min_exponent() const;
  // Smallest input scale at which the action maps cells to cells.
  int resolving_scale() const;
  bool operator==(const PLMap& other) const { return points == other.points; }
};

// Haar coefficients of a piecewise-constant function on the 2^scale cells of
// [0,1], normalized so that the coefficient vector norm is the L2 norm.
struct CellVector {
  int scale = 0;
  Mat coeffs;
};

CellVector haar_embed(const CellVector& v, int scale);
double distance(const CellVector& a, const CellVector& b);

// (f . xi)(x) = |(f^-1)'(x)|^(1/2) xi(f^-1(x)); the result lives at scale
// n - min_exponent. Throws Refused below the resolving scale.
CellVector act(const PLMap& f, const CellVector& xi);
// Acts after lifting xi to the resolving scale of f if needed.
CellVector act_lifted(const PLMap& f, const CellVector& xi);

// Unitary action of a smooth increasing diffeomorphism phi of [0,1] (with
// inverse and derivative of the inverse supplied), sampled on 2^quad_scale
// midpoints, compared in L2 with the piecewise-linear action on xi.
struct Diffeo {
  std::function<double(double)> inverse;
  std::function<double(double)> inverse_derivative;
};
double diffeo_distance(const PLMap& f, const Diffeo& phi, const CellVector& xi, int quad_scale);

Report thompson_report(std::uint64_t seed = 7);

}  // namespace limitflow::thompson
