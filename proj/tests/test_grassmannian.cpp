#include "doctest.h"

#include <cmath>
#include <numbers>

#include "isoproj/errors.hpp"
#include "isoproj/grassmannian.hpp"

using namespace isoproj;

namespace {

double max_orthonormality_error(const Frame& f) {
  double worst = 0;
  for (std::size_t i = 0; i < f.rank(); ++i)
    for (std::size_t j = 0; j < f.rank(); ++j)
      worst = std::max(worst, std::abs(dot(f.vector(i), f.vector(j)) - (i == j ? 1.0 : 0.0)));
  return worst;
}

// Composite Simpson rule on [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Ratio of the two sides for a function on R^2 and lines through 0,
// both by deterministic polar quadrature.
double polar_ratio(TestFunction f) {
  const double rmax = 12.0;
  auto at = [&](double r, double th) {
    const double p[2] = {r * std::cos(th), r * std::sin(th)};
    return evaluate_test_function(f, p);
  };
  const double lhs = simpson(
      [&](double th) { return simpson([&](double r) { return r * at(r, th); }, 0, rmax, 2000); }, 0,
      2 * std::numbers::pi, 400);
  // Lines are parametrized by angle in [0, pi); each carries |a| f(a q) da.
  const double rhs =
      simpson(
          [&](double th) {
            return simpson([&](double r) { return r * (at(r, th) + at(r, th + std::numbers::pi)); },
                           0, rmax, 2000);
          },
          0, std::numbers::pi, 400) /
      std::numbers::pi;
  return lhs / rhs;
}

}  // namespace

TEST_CASE("sampled unitaries are orthogonal, preserve omega, and are reproducible") {
  RngStream rng(10, 1);
  for (int n = 1; n <= 4; ++n) {
    const UnitaryAction u = sample_unitary(n, rng);
    const Eigen::MatrixXd& m = u.matrix();
    CHECK((m.transpose() * m - Eigen::MatrixXd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k < 20; ++k) {
      Point a(2 * n), b(2 * n);
      for (auto& v : a) v = rng.normal();
      for (auto& v : b) v = rng.normal();
      CHECK(std::abs(symplectic_form(u.apply(a), u.apply(b)) - symplectic_form(a, b)) < 1e-9);
    }
  }
  RngStream r1(99, 5), r2(99, 5);
  CHECK(sample_unitary(3, r1).matrix() == sample_unitary(3, r2).matrix());
  CHECK_THROWS_AS(UnitaryAction(Eigen::MatrixXd::Identity(3, 3)), ArgumentError);
}

TEST_CASE("sampled subspaces are isotropic and orthonormal") {
  RngStream rng(12, 0);
  for (int i = 0; i < 2000; ++i) {
    const int n = 1 + i % 3;
    const int m = 1 + (i / 3) % n;
    const IsotropicSubspace v = sample_isotropic_subspace(n, m, rng);
    CHECK(max_orthonormality_error(v.frame()) <= 1e-10);
    CHECK(is_isotropic(v.frame(), 1e-10));
  }
  CHECK_THROWS_AS(sample_isotropic_subspace(2, 3, rng), ArgumentError);
  CHECK_THROWS_AS(sample_isotropic_subspace(2, 0, rng), ArgumentError);
}

TEST_CASE("lines in the plane have uniform angle") {
  RngStream rng(13, 0);
  std::vector<double> angles;
  for (int i = 0; i < 10000; ++i) {
    const IsotropicSubspace v = sample_isotropic_subspace(1, 1, rng);
    double th = std::atan2(v.frame().vector(0)[1], v.frame().vector(0)[0]);
    if (th < 0) th += std::numbers::pi;
    if (th >= std::numbers::pi) th -= std::numbers::pi;
    angles.push_back(th);
  }
  const KsResult ks = ks_one_sample(angles, [](double t) { return t / std::numbers::pi; });
  CHECK_FALSE(ks.reject);
}

TEST_CASE("invariance test") {
  RngStream rng(14, 0);
  const InvarianceReport same =
      invariance_test(2, 1, InvarianceStatistic::ProjectionNorm, 2000, rng, UnitaryAction::identity(2));
  CHECK(same.pass);
  CHECK(same.ks.statistic == 0.0);
  for (auto stat : {InvarianceStatistic::ProjectionNorm, InvarianceStatistic::FirstVectorAlignment}) {
    RngStream r(15, 0);
    CHECK(invariance_test(2, 1, stat, 10000, r).pass);
  }
  RngStream rb(16, 0);
  const InvarianceReport biased = invariance_test(2, 1, InvarianceStatistic::ProjectionNorm, 10000,
                                                  rb, SubspaceSampler::BiasedFirstCoordinate);
  CHECK_FALSE(biased.pass);
}

TEST_CASE("smallness probability") {
  RngStream rng(17, 0);
  const Point x{0.6, 0.0, 0.0, 0.8};
  CHECK(smallness_probability(x, 1, 1.0, 100, rng).value == 1.0);
  CHECK_THROWS_AS(smallness_probability(Point{0, 0, 0, 0}, 1, 0.1, 10, rng), ArgumentError);
  CHECK_THROWS_AS(smallness_probability(x, 1, 0.0, 10, rng), ArgumentError);

  RngStream a(18, 0), b(18, 1);
  const MonteCarloEstimate e1 = smallness_probability(x, 1, 0.2, 100000, a);
  const Point x3{1.8, 0.0, 0.0, 2.4};
  const MonteCarloEstimate e2 = smallness_probability(x3, 1, 0.6, 100000, b);
  CHECK(std::abs(e1.value - e2.value) <= 3 * std::hypot(e1.standard_error, e2.standard_error));

  // |P_V x| for V ~ mu_{4,1} is distributed like the first coordinate of a
  // uniform point on S^3 (Haar column), plus its J-partner:
  // P(|P_V x| <= d) = (2/pi)(d sqrt(1 - d^2) + asin d).
  const double d = 0.2;
  const double exact = 2.0 / std::numbers::pi * (d * std::sqrt(1 - d * d) + std::asin(d));
  CHECK(std::abs(e1.value - exact) < 4 * e1.standard_error);

  // Lagrangian planes in R^4: the 2D marginal of S^3 is uniform on the disc, so P = d^2.
  RngStream c(19, 0);
  const MonteCarloEstimate e3 = smallness_probability(Point{1, 0, 0, 0}, 2, 0.3, 100000, c);
  CHECK(std::abs(e3.value - 0.09) < 4 * e3.standard_error);
}

TEST_CASE("smallness sweep slope equals m") {
  const Point x{0.6, 0.0, 0.0, 0.8};
  std::vector<double> d1, d2;
  for (int k = 0; k <= 8; ++k) d1.push_back(std::pow(10.0, -3.0 + 2.0 * k / 8));
  for (int k = 0; k <= 8; ++k) d2.push_back(std::pow(10.0, -1.5 + 1.0 * k / 8));
  RngStream rng(20, 0);
  const SmallnessSweep s1 = smallness_sweep(x, 1, d1, 200000, rng);
  CHECK(std::abs(s1.loglog.slope - 1.0) < 0.15);
  const SmallnessSweep s2 = smallness_sweep(x, 2, d2, 200000, rng);
  CHECK(std::abs(s2.loglog.slope - 2.0) < 0.15);
}

TEST_CASE("disintegration ratio is independent of the test function") {
  CHECK(polar_ratio(TestFunction::IsotropicGaussian) == doctest::Approx(std::numbers::pi).epsilon(1e-6));
  CHECK(polar_ratio(TestFunction::AnisotropicGaussian) == doctest::Approx(std::numbers::pi).epsilon(1e-6));

  RngStream rng(21, 0);
  const DisintegrationResult zero = disintegration_check(TestFunction::Zero, 2, 1, 1000, rng);
  CHECK(zero.lhs.value == 0.0);
  CHECK(zero.rhs.value == 0.0);
  CHECK_THROWS_AS(disintegration_check(TestFunction::Constant, 2, 1, 10, rng), ArgumentError);

  for (auto [n, m] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
    std::vector<DisintegrationResult> rs;
    for (auto f : {TestFunction::IsotropicGaussian, TestFunction::AnisotropicGaussian, TestFunction::Bump})
      rs.push_back(disintegration_check(f, n, m, 100000, rng));
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = i + 1; j < rs.size(); ++j)
        CHECK(std::abs(rs[i].ratio - rs[j].ratio) <= 3 * std::hypot(rs[i].ratio_stderr, rs[j].ratio_stderr));
    if (n == 1) CHECK(std::abs(rs[0].ratio / polar_ratio(TestFunction::IsotropicGaussian) - 1) < 0.02);
  }
}
