#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "limitflow/linalg.hpp"
#include "limitflow/report.hpp"

namespace limitflow {

enum class Direction { increasing, toward_zero };

// Finite, totally ordered list of scale labels, ordered in the direction of
// the limit (increasing labels, or decreasing positive labels toward zero).
class ScaleChain {
 public:
  ScaleChain(std::vector<double> labels, Direction direction = Direction::increasing);

  static ScaleChain integers(int first, int last);

  std::size_t size() const { return labels_.size(); }
  double label(std::size_t i) const { return labels_.at(i); }
  const std::vector<double>& labels() const { return labels_; }
  Direction direction() const { return direction_; }
  std::size_t index_of(double label) const;
  bool operator==(const ScaleChain& other) const;

 private:
  std::vector<double> labels_;
  Direction direction_;
};

// A finite-dimensional normed level. Elements are stored as rows x cols
// matrices; vectors have cols == 1.
struct LevelSpace {
  Eigen::Index rows = 1;
  Eigen::Index cols = 1;
  NormKind norm = NormKind::hilbert;
  bool algebra = false;

  static LevelSpace vectors(Eigen::Index dim, NormKind norm = NormKind::hilbert);
  static LevelSpace matrices(Eigen::Index n, NormKind norm = NormKind::op, bool algebra = true);

  Eigen::Index dim() const { return rows * cols; }
  Mat zero() const { return Mat::Zero(rows, cols); }
  Mat unit() const;
  double norm_of(const Mat& x) const { return limitflow::norm_of(norm, x); }
  // Norm dual to this level's norm under the bilinear pairing sum_ij f_ij x_ij.
  double dual_norm_of(const Mat& f) const;
  void check(const Mat& x, const std::string& where) const;
  bool operator==(const LevelSpace& o) const {
    return rows == o.rows && cols == o.cols && norm == o.norm && algebra == o.algebra;
  }
};

// Linear map between two levels, given by an action (and optionally its
// dense matrix on column-major vectorized elements).
class ConnectingMap {
 public:
  using Action = std::function<Mat(const Mat&)>;

  ConnectingMap() = default;
  ConnectingMap(Action action, LevelSpace source, LevelSpace target);

  static ConnectingMap identity(const LevelSpace& level);
  static ConnectingMap zero(const LevelSpace& source, const LevelSpace& target);
  // x -> m * vec(x), reshaped to the target level.
  static ConnectingMap from_matrix(const Mat& m, const LevelSpace& source, const LevelSpace& target);

  // (next o this)
  ConnectingMap then(const ConnectingMap& next) const;

  Mat operator()(const Mat& x) const;
  Mat dense(Eigen::Index cap = 2048) const;

  const LevelSpace& source() const { return source_; }
  const LevelSpace& target() const { return target_; }
  bool is_identity() const { return identity_; }
  bool is_zero() const { return zero_; }

 private:
  Action action_;
  LevelSpace source_;
  LevelSpace target_;
  bool identity_ = false;
  bool zero_ = false;
};

class SoftSystem {
 public:
  using PairRule = std::function<ConnectingMap(std::size_t n, std::size_t m)>;

  // Strict system generated from single-step maps steps[i]: level i -> i+1.
  static SoftSystem from_steps(ScaleChain chain, std::vector<LevelSpace> levels,
                               std::vector<ConnectingMap> steps);
  // System with every j_nm (n > m) given directly by a rule.
  static SoftSystem from_rule(ScaleChain chain, std::vector<LevelSpace> levels, PairRule rule,
                              bool strict);
  static SoftSystem constant(ScaleChain chain, LevelSpace level);

  const ScaleChain& chain() const { return chain_; }
  std::size_t size() const { return chain_.size(); }
  const LevelSpace& level(std::size_t i) const { return levels_.at(i); }
  bool strict() const { return strict_; }

  // j_nm for n >= m (identity when n == m).
  const ConnectingMap& map(std::size_t n, std::size_t m) const;
  // j_nm x, with the convention j_nm = 0 when n < m.
  Mat apply(std::size_t n, std::size_t m, const Mat& x) const;

  std::string name;

 private:
  SoftSystem(ScaleChain chain, std::vector<LevelSpace> levels, bool strict);
  std::size_t slot(std::size_t n, std::size_t m) const { return n * (n + 1) / 2 + m; }

  ScaleChain chain_;
  std::vector<LevelSpace> levels_;
  std::vector<ConnectingMap> maps_;
  bool strict_ = false;
};

struct ElementNet {
  std::vector<Mat> entries;

  std::size_t size() const { return entries.size(); }
  const Mat& operator[](std::size_t i) const { return entries.at(i); }
  Mat& operator[](std::size_t i) { return entries.at(i); }
};

struct FunctionalNet {
  std::vector<Mat> covectors;
};

enum class Verdict { convergent, inconclusive, divergent };
std::string to_string(Verdict v);

struct DefectEntry {
  double m;
  double n;
  double value;
};

struct ConvergenceReport {
  std::vector<double> labels;
  std::vector<DefectEntry> defect;
  // D^(m) for every m except the last label, in chain order.
  std::vector<double> dhat;
  std::vector<double> norm_trail;
  double seminorm_estimate = 0.0;
  double uniform_bound = 0.0;
  Verdict verdict = Verdict::inconclusive;
  double tolerance = 0.0;

  bool convergent() const { return verdict == Verdict::convergent; }
  json to_json() const;
  std::string to_csv() const;
  Report to_report(const std::string& name) const;
};

struct LevelProbe {
  std::size_t level;
  Mat x;
};

struct ProductProbe {
  std::size_t level;
  Mat a;
  Mat b;
};

// Limit-side model supplied by a case study: how a convergent net is
// represented in the limit, and how a limit element is lifted to a net.
struct LimitModel {
  LevelSpace space;
  std::function<Mat(const ElementNet&)> limit_of;
  std::function<ElementNet(const Mat&)> lift;

  // Last entry represents the limit; lift by the basic net from level 0.
  static LimitModel final_level(const SoftSystem& system);
};

constexpr double kExactTol = 1e-8;
constexpr double kTrendTol = 1e-2;

void check_net(const SoftSystem& system, const ElementNet& net);
double uniform_bound(const SoftSystem& system, const ElementNet& net);

// Decide a verdict from a D^ profile (chain order) with the tail rule.
Verdict tail_verdict(const std::vector<double>& dhat, double tol);

ElementNet make_basic_net(const SoftSystem& system, double m_label, const Mat& x);
ElementNet make_basic_net_at(const SoftSystem& system, std::size_t m, const Mat& x);
ElementNet zero_net(const SoftSystem& system);
ElementNet add(const ElementNet& a, const ElementNet& b, cplx beta = 1.0);
ElementNet scale(const ElementNet& a, cplx s);
ElementNet map_net(const ElementNet& a, const std::function<Mat(std::size_t, const Mat&)>& f);

double seminorm(const SoftSystem& system, const ElementNet& net, double tail_start);
double seminorm_from(const SoftSystem& system, const ElementNet& net, std::size_t start);
// Tail-max over the final three labels (or fewer for very short chains).
double tail_seminorm(const SoftSystem& system, const ElementNet& net);

ConvergenceReport jconvergence_diagnostic(const SoftSystem& system, const ElementNet& net,
                                          double tol = kTrendTol);

Report soft_transitivity_defect(const SoftSystem& system, const std::vector<LevelProbe>& probes,
                                double tol = kExactTol);

Report asymptotic_isometry_defect(const SoftSystem& system, double tol = kTrendTol,
                                  int probe_count = 200, std::uint64_t seed = 7);

cplx pair(const Mat& x, const Mat& phi);
Report jstar_diagnostic(const SoftSystem& system, const FunctionalNet& fnet,
                        const std::vector<ElementNet>& probe_nets, double tol = kTrendTol);

ElementNet net_product(const SoftSystem& system, const ElementNet& a, const ElementNet& b);
ElementNet net_adjoint(const SoftSystem& system, const ElementNet& a);

Report multiplicativity_defect(const SoftSystem& system, const std::vector<ProductProbe>& probes,
                               double tol = kExactTol);

// Spectra, envelope and positivity checks; with a polynomial (coefficients
// in increasing degree) also the functional-calculus net f(a_n).
Report algebra_diagnostics(const SoftSystem& system, const ElementNet& net, double tol = kTrendTol,
                           const std::vector<cplx>& polynomial = {});

SoftSystem split_system(ScaleChain chain, std::vector<LevelSpace> levels, LevelSpace limit_space,
                        std::vector<ConnectingMap> i_maps, std::vector<ConnectingMap> p_maps,
                        const std::vector<Mat>& limit_probes, double tol = kExactTol);

SoftSystem tensor_system(const SoftSystem& a, const SoftSystem& b);
// Kronecker product of elements laid out as in tensor_system levels.
Mat tensor_element(const Mat& x, const Mat& y);

// Cross-basic defects between two map families on the same levels, and
// agreement of verdicts on a corpus of nets.
Report equivalent_maps_check(const SoftSystem& a, const SoftSystem& b,
                             const std::vector<LevelProbe>& probes,
                             const std::vector<ElementNet>& corpus, double tol = kTrendTol);

}  // namespace limitflow
