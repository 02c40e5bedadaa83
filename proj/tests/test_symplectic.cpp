#include "doctest.h"

#include <cmath>

#include "isoproj/errors.hpp"
#include "isoproj/rng.hpp"
#include "isoproj/symplectic.hpp"

using namespace isoproj;

namespace {

Point random_point(std::size_t d, RngStream& rng) {
  Point p(d);
  for (auto& v : p) v = rng.normal();
  return p;
}

Point unit(std::size_t d, std::size_t i) {
  Point p(d, 0.0);
  p[i] = 1.0;
  return p;
}

}  // namespace

TEST_CASE("symplectic form values") {
  CHECK(symplectic_form(unit(4, 0), unit(4, 2)) == 1.0);
  CHECK(symplectic_form(Point{1, 2, 3, 4}, Point{5, 6, 7, 8}) == -16.0);
  RngStream rng(1, 0);
  const Point x = random_point(6, rng);
  CHECK(symplectic_form(x, x) == 0.0);
  CHECK_THROWS_AS(symplectic_form(Point{1, 2}, Point{1, 2, 3, 4}), ArgumentError);
  CHECK_THROWS_AS(symplectic_form(Point{1, 2, 3}, Point{1, 2, 3}), ArgumentError);
}

TEST_CASE("symplectic form is antisymmetric and bilinear") {
  RngStream rng(2, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Point x = random_point(6, rng), y = random_point(6, rng), z = random_point(6, rng);
    const double a = rng.normal(), b = rng.normal();
    CHECK(symplectic_form(x, y) == -symplectic_form(y, x));
    Point axby(6);
    for (int i = 0; i < 6; ++i) axby[i] = a * x[i] + b * y[i];
    const double lhs = symplectic_form(axby, z);
    const double rhs = a * symplectic_form(x, z) + b * symplectic_form(y, z);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("orthonormalize") {
  const Frame f = orthonormalize({unit(4, 0), unit(4, 1)});
  CHECK(f.rank() == 2);
  CHECK(f.vector(0)[0] == 1.0);
  CHECK(f.vector(1)[1] == 1.0);
  const Frame g = orthonormalize({Point{3, 0, 0, 0}});
  CHECK(g.vector(0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(orthonormalize({unit(4, 0), unit(4, 0)}), RankError);
  CHECK_THROWS_AS(orthonormalize({}), ArgumentError);

  RngStream rng(3, 0);
  std::vector<Point> vs;
  for (int i = 0; i < 5; ++i) vs.push_back(random_point(8, rng));
  const Frame h = orthonormalize(vs);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(dot(h.vector(i), h.vector(j)) - (i == j ? 1.0 : 0.0)) < 1e-14);
}

TEST_CASE("isotropy") {
  CHECK(is_isotropic(orthonormalize({unit(2, 0)})));
  CHECK_FALSE(is_isotropic(orthonormalize({unit(4, 0), unit(4, 2)})));
  CHECK(is_isotropic(canonical_isotropic(3, 3).frame()));
  CHECK_THROWS_AS(IsotropicSubspace(orthonormalize({unit(4, 0), unit(4, 2)})), ArgumentError);

  // Rotating within a Lagrangian plane keeps it isotropic.
  const double c = std::cos(0.7), s = std::sin(0.7);
  const Frame rebased(4, {c, s, 0, 0, -s, c, 0, 0});
  CHECK(is_isotropic(rebased));
}

TEST_CASE("projection and complement") {
  RngStream rng(4, 0);
  const IsotropicSubspace v(orthonormalize({Point{1, 1, 0, 0}, Point{0, 0, 1, -1}}));
  const Frame perp = v.complement();
  CHECK(perp.rank() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(dot(perp.vector(i), v.frame().vector(j))) < 1e-12);

  for (int trial = 0; trial < 200; ++trial) {
    const Point x = random_point(4, rng), y = random_point(4, rng);
    const Point px = v.project(x);
    const Point ppx = v.project(px);
    const Point qx = project(perp, x);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(ppx[i] - px[i]) < 1e-12);
      CHECK(std::abs(px[i] + qx[i] - x[i]) < 1e-12);
    }
    CHECK(std::abs(dot(px, y) - dot(x, v.project(y))) < 1e-12);
    CHECK(norm(px) <= norm(x) + 1e-15);
  }

  const IsotropicSubspace line = canonical_isotropic(1, 1);
  const Frame c = line.complement();
  CHECK(c.rank() == 1);
  CHECK(std::abs(c.vector(0)[1]) == doctest::Approx(1.0));
  const Point inside = line.project(Point{2.5, 0});
  CHECK(inside[0] == 2.5);
  const Point killed = line.project(Point{0, 3});
  CHECK(killed[0] == 0.0);
  CHECK(killed[1] == 0.0);

  for (int n = 1; n <= 3; ++n)
    for (int m = 1; m <= n; ++m) CHECK(canonical_isotropic(n, m).complement().rank() == 2u * n - m);
}
