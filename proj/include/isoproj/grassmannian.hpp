#pragma once

// The U(n)-invariant probability measure on the isotropic Grassmannian,
// realized by pushing Haar measure on U(n) through U -> U(span{e_1..e_m}),
// plus Monte-Carlo checks of the exact identities it satisfies.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "isoproj/rng.hpp"
#include "isoproj/stats.hpp"
#include "isoproj/symplectic.hpp"

namespace isoproj {

/// Real 2n x 2n form of a unitary matrix U = A + iB, i.e. [[A, -B], [B, A]].
class UnitaryAction {
public:
  /// Throws ArgumentError unless `matrix` is orthogonal and commutes with J.
  explicit UnitaryAction(Eigen::MatrixXd matrix);
  static UnitaryAction identity(int n);
  static UnitaryAction from_complex(const Eigen::MatrixXcd& u);

  int n() const { return static_cast<int>(matrix_.rows() / 2); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  Point apply(std::span<const double> x) const;
  IsotropicSubspace apply(const IsotropicSubspace& v) const;

private:
  Eigen::MatrixXd matrix_;
};

/// Haar-distributed unitary: complex Gaussian matrix, Householder QR, then
/// column phases fixed so that diag(R) is real positive.
UnitaryAction sample_unitary(int n, RngStream& rng);

/// U * span{e_1..e_m} for a fresh Haar U. Throws ArgumentError unless 1 <= m <= n.
IsotropicSubspace sample_isotropic_subspace(int n, int m, RngStream& rng);

/// Fraction of sampled V in G_h(2n, m) with |P_V x| <= delta, with binomial
/// standard error. Throws ArgumentError for x = 0, delta <= 0, trials = 0.
MonteCarloEstimate smallness_probability(std::span<const double> x, int m, double delta,
                                         std::size_t trials, RngStream& rng);

struct SmallnessSweep {
  std::vector<double> deltas;
  std::vector<MonteCarloEstimate> estimates;
  LineFit loglog;  // log p against log delta, weighted by hit counts
};

/// One set of sampled subspaces evaluated at every delta in the grid.
SmallnessSweep smallness_sweep(std::span<const double> x, int m, std::span<const double> deltas,
                               std::size_t trials, RngStream& rng, unsigned threads = 1);

enum class TestFunction {
  IsotropicGaussian,    // exp(-|x|^2 / 2), Gaussian proposal of width 1.25
  AnisotropicGaussian,  // widths 0.6 * 1.5^i, Gaussian proposal 1.25 * max width
  Bump,                 // exp(-1 / (1 - |x|^2 / R^2)) on |x| < R = 1.5, uniform proposal
  Zero,                 // identically zero
  Constant,             // identically one: not integrable, rejected
};

std::string to_string(TestFunction f);
TestFunction test_function_from_string(const std::string& name);

/// Evaluates the catalogue function at x (any dimension).
double evaluate_test_function(TestFunction f, std::span<const double> x);

struct DisintegrationResult {
  MonteCarloEstimate lhs;  // integral of f over R^{2n}
  MonteCarloEstimate rhs;  // E_V integral over V of |u|^{2n-m} f(u) dH^m(u)
  double ratio = 0.0;
  double ratio_stderr = 0.0;
};

/// Both sides of the isotropic disintegration identity, without its constant.
DisintegrationResult disintegration_check(TestFunction f, int n, int m, std::size_t samples,
                                          RngStream& rng, unsigned threads = 1);

enum class InvarianceStatistic { ProjectionNorm, FirstVectorAlignment };
enum class SubspaceSampler { Haar, BiasedFirstCoordinate };

struct InvarianceReport {
  KsResult ks;
  bool pass = false;
  std::size_t trials = 0;
};

/// Two-sample KS comparison of a statistic over sampled V against the same
/// statistic over W V for a fixed unitary W (the same V samples are reused,
/// so W = I gives a zero statistic). Passes iff the 1% test does not reject.
InvarianceReport invariance_test(int n, int m, InvarianceStatistic statistic, std::size_t trials,
                                 RngStream& rng, const UnitaryAction& w,
                                 SubspaceSampler sampler = SubspaceSampler::Haar);
/// As above with W drawn from the Haar measure using `rng`.
InvarianceReport invariance_test(int n, int m, InvarianceStatistic statistic, std::size_t trials,
                                 RngStream& rng, SubspaceSampler sampler = SubspaceSampler::Haar);

/// Negative control: first real Gaussian coordinate squared before QR, which
/// breaks the invariance of the induced law.
IsotropicSubspace sample_biased_subspace(int n, int m, RngStream& rng);

}  // namespace isoproj
