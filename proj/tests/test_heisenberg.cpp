#include "doctest.h"

#include <cmath>

#include "isoproj/errors.hpp"
#include "isoproj/grassmannian.hpp"
#include "isoproj/heisenberg.hpp"

using namespace isoproj;

namespace {

HeisenbergPoint random_point(int n, RngStream& rng) {
  HeisenbergPoint p{Point(2 * static_cast<std::size_t>(n)), 0.0};
  for (double& v : p.z) v = 2 * rng.normal();
  p.t = 2 * rng.normal();
  return p;
}

double gap(const HeisenbergPoint& a, const HeisenbergPoint& b) {
  double g = std::abs(a.t - b.t);
  for (std::size_t i = 0; i < a.z.size(); ++i) g = std::max(g, std::abs(a.z[i] - b.z[i]));
  return g;
}

}  // namespace

TEST_CASE("group law hand values") {
  const HeisenbergPoint a{{1.0, 0.0}, 0.0}, b{{0.0, 1.0}, 0.0};
  // omega((1,0),(0,1)) = 1.
  CHECK(mul(a, b).t == -0.5);
  CHECK(mul(b, a).t == 0.5);
  CHECK(koranyi_norm({{1.0, 0.0}, 0.25}) == doctest::Approx(std::pow(2.0, 0.25)));
  CHECK(koranyi_norm({{0.0, 0.0}, 1.0}) == doctest::Approx(2.0));
  CHECK(HeisenbergPoint::from_coords(std::vector<double>{1, 2, 3}).t == 3);
  CHECK_THROWS_AS(HeisenbergPoint::from_coords(std::vector<double>{1, 2}), ArgumentError);
  CHECK_THROWS_AS(dilate(0.0, a), ArgumentError);
  CHECK_THROWS_AS(mul(a, HeisenbergPoint::identity(2)), ArgumentError);
}

TEST_CASE("group axioms, dilations and the gauge on random inputs") {
  RngStream rng(77, 0);
  double worst = 0;
  for (int k = 0; k < 20000; ++k) {
    const int n = 1 + k % 3;
    const HeisenbergPoint p = random_point(n, rng), q = random_point(n, rng), s = random_point(n, rng);
    const double r = 0.1 + 3 * rng.uniform();
    const HeisenbergPoint e = HeisenbergPoint::identity(n);
    worst = std::max(worst, gap(mul(mul(p, q), s), mul(p, mul(q, s))));
    worst = std::max(worst, gap(mul(p, e), p));
    worst = std::max(worst, gap(mul(e, p), p));
    worst = std::max(worst, gap(mul(p, inverse(p)), e));
    worst = std::max(worst, gap(mul(inverse(p), p), e));
    worst = std::max(worst, gap(dilate(r, mul(p, q)), mul(dilate(r, p), dilate(r, q))));
    worst = std::max(worst, std::abs(koranyi_norm(dilate(r, p)) - r * koranyi_norm(p)));
    worst = std::max(worst, std::abs(koranyi_distance(mul(s, p), mul(s, q)) - koranyi_distance(p, q)));
    worst = std::max(worst, std::abs(koranyi_norm(inverse(p)) - koranyi_norm(p)));
    // The gauge distance is a metric.
    CHECK(koranyi_distance(p, q) <= koranyi_distance(p, s) + koranyi_distance(s, q) + 1e-9);
    const Point pc = p.coords(), qc = q.coords();
    worst = std::max(worst, std::abs(MetricTag::koranyi(n).distance(pc, qc) - koranyi_distance(p, q)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("splitting and projector identities") {
  RngStream rng(78, 0);
  double worst = 0;
  for (int k = 0; k < 5000; ++k) {
    const int n = 1 + k % 3;
    const int m = 1 + (k / 3) % n;
    const HorizontalSubgroup v(sample_isotropic_subspace(n, m, rng));
    const HeisenbergPoint p = random_point(n, rng);
    const HeisenbergPoint h = horizontal_projection(v, p);
    const HeisenbergPoint w = vertical_projection(v, p);
    worst = std::max(worst, gap(mul(w, h), p));
    worst = std::max(worst, gap(horizontal_projection(v, h), h));
    worst = std::max(worst, gap(vertical_projection(v, w), w));
    // The vertical part lies in V^perp x R: it has no V component.
    for (double c : v.base().coordinates(w.z)) worst = std::max(worst, std::abs(c));
    // Horizontal projection is self-adjoint on the z layer.
    const HeisenbergPoint q = random_point(n, rng);
    worst = std::max(worst, std::abs(dot(horizontal_projection(v, p).z, q.z) -
                                     dot(p.z, horizontal_projection(v, q).z)));
    CHECK(h.t == 0.0);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("catalogue sets: dimensions, witness, and rejection of bad maps") {
  CHECK(similarity_dimension(heisenberg_catalogue("h_dust")) == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-10));
  CHECK(similarity_dimension(heisenberg_catalogue("h_triangle")) == doctest::Approx(std::log(3.0) / std::log(4.0)).epsilon(1e-10));
  CHECK(similarity_dimension(heisenberg_catalogue("h_square")) == doctest::Approx(std::log(4.0) / std::log(3.0)).epsilon(1e-10));
  for (const auto& name : heisenberg_catalogue_names()) {
    const HeisenbergIFS ifs = heisenberg_catalogue(name);
    RngStream rng(4, 0);
    const EmpiricalMeasure mu = heisenberg_chaos_game(ifs, 3000, rng);
    CHECK(mu.metric() == MetricTag::koranyi(1));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      CHECK(koranyi_norm(HeisenbergPoint::from_coords(mu.point(i))) <= 1.0 + 1e-12);
    }
  }
  const HeisenbergPoint o = HeisenbergPoint::identity(1);
  CHECK_THROWS_AS(HeisenbergIFS("overlap", {{{{0.1, 0.0}, 0.0}, 0.5}, {{{-0.1, 0.0}, 0.0}, 0.5}}, o, 1.0), ConfigError);
  CHECK_THROWS_AS(HeisenbergIFS("escape", {{{{0.9, 0.0}, 0.0}, 0.3}, {{{-0.5, 0.0}, 0.0}, 0.3}}, o, 1.0), ConfigError);
}

TEST_CASE("gauge ball sample has Haar volume scaling") {
  RngStream rng(9, 0);
  const EmpiricalMeasure ball = gauge_ball_sample(1, 40000, rng, 2.0);
  std::size_t inner = 0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const double r = koranyi_norm(HeisenbergPoint::from_coords(ball.point(i)));
    CHECK(r <= 2.0);
    inner += r <= 1.0;
  }
  // Haar measure of B(0, r) scales like r^4 in H^1.
  const double frac = static_cast<double>(inner) / 40000.0;
  CHECK(std::abs(frac - 1.0 / 16.0) < 4 * std::sqrt(frac * (1 - frac) / 40000.0));
}

TEST_CASE("vertical coset slabs") {
  RngStream rng(10, 0);
  const EmpiricalMeasure cloud = gauge_ball_sample(1, 20000, rng);
  const HorizontalSubgroup v(sample_isotropic_subspace(1, 1, rng));
  const HeisenbergPoint p = HeisenbergPoint::from_coords(cloud.point(17));
  const double delta = 0.05;
  const EmpiricalMeasure slab = vertical_coset_slab(cloud, v, p, delta);
  CHECK(slab.size() > 0);
  CHECK(slab.weight(0) == doctest::Approx(1.0 / 20000.0 / (2 * delta)));

  // Any point of the same coset V^perp * p gives the same slab.
  const Point perp = v.base().complement().embed(std::vector<double>{0.7});
  const HeisenbergPoint w{perp, -1.3};
  const EmpiricalMeasure same = vertical_coset_slab(cloud, v, mul(w, p), delta);
  CHECK(same.points() == slab.points());

  // Riemann sum of slab masses over a grid of V equals the total mass.
  const double h = 0.02;
  double integral = 0;
  for (int k = -60; k <= 60; ++k) {
    const HeisenbergPoint anchor{v.base().frame().embed(std::vector<double>{k * h}), 0.0};
    integral += h * vertical_coset_slab(cloud, v, anchor, delta).total_mass();
  }
  CHECK(std::abs(integral - 1.0) <= 0.05);

  const EmpiricalMeasure far = vertical_coset_slab(cloud, v, {{50.0, 50.0}, 0.0}, delta);
  CHECK(far.empty());
  CHECK_THROWS_AS(vertical_coset_slab(cloud, v, p, 0.0), ArgumentError);
}
