#include "doctest.h"

#include <cmath>
#include <numbers>

#include "isoproj/dimension.hpp"
#include "isoproj/errors.hpp"
#include "isoproj/fractal.hpp"
#include "isoproj/heisenberg.hpp"

using namespace isoproj;

namespace {

EmpiricalMeasure uniform_cube(std::size_t dim, std::size_t count, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> pts(dim * count);
  for (auto& v : pts) v = rng.uniform();
  return EmpiricalMeasure::uniform(MetricTag::euclidean(dim), std::move(pts));
}

// Points of a line segment of length 1 in the plane.
EmpiricalMeasure planar_segment(std::size_t count, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> pts;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform();
    pts.push_back(0.6 * u);
    pts.push_back(0.8 * u);
  }
  return EmpiricalMeasure::uniform(MetricTag::euclidean(2), std::move(pts));
}

}  // namespace

TEST_CASE("Riesz energy hand values") {
  const MetricTag e1 = MetricTag::euclidean(1);
  const EmpiricalMeasure two(e1, {0.0, 1.0}, {0.5, 0.5}, 1.0);
  const RieszEnergy r = riesz_energy(two, 1.0, e1);
  // Ordered pairs (0,1) and (1,0), each 1/4 * 1^{-1}.
  CHECK(std::abs(r.pair_sum - 0.5) <= 1e-12);
  // Renormalized by 1 - sum p_i^2 = 1/2.
  CHECK(std::abs(r.value - 1.0) <= 1e-12);
  CHECK(r.coincident_pairs == 0);

  const EmpiricalMeasure apart(e1, {0.0, 2.0}, {0.5, 0.5}, 1.0);
  CHECK(std::abs(riesz_energy(apart, 1.0, e1).pair_sum - 0.25) <= 1e-12);
  CHECK(std::abs(riesz_energy(apart, 2.0, e1).pair_sum - 0.125) <= 1e-12);

  const EmpiricalMeasure a(e1, {0.0}, {1.0}, 1.0), b(e1, {2.0}, {1.0}, 1.0);
  CHECK(std::abs(mutual_energy(a, b, 1.0, e1).value - 0.5) <= 1e-12);

  const EmpiricalMeasure stacked(e1, {0.0, 0.0, 1.0}, {0.25, 0.25, 0.5}, 1.0);
  const RieszEnergy st = riesz_energy(stacked, 1.0, e1);
  CHECK(st.coincident_pairs == 2);
  CHECK(std::abs(st.coincident_weight - 0.125) <= 1e-12);
  CHECK(std::abs(st.pair_sum - 4 * 0.25 * 0.5) <= 1e-12);

  const EmpiricalMeasure atom(e1, {3.0, 3.0}, {0.5, 0.5}, 1.0);
  CHECK_THROWS_AS(riesz_energy(atom, 1.0, e1), DegenerateMeasureError);
  CHECK_THROWS_AS(riesz_energy(two, 0.0, e1), ArgumentError);
}

TEST_CASE("Riesz energy of the uniform interval at s = 1/2") {
  // Double integral of |x - y|^{-1/2} over [0,1]^2 is 2 * int_0^1 (1 - u) u^{-1/2} du = 8/3.
  const EmpiricalMeasure mu = uniform_cube(1, 20000, 31);
  PairOptions opt;
  opt.max_points = 20000;
  const RieszEnergy r = riesz_energy(mu, 0.5, mu.metric(), opt);
  CHECK(std::abs(r.value / (8.0 / 3.0) - 1) < 0.02);
  // Energy is finite below the dimension and blows up at it.
  const double below = riesz_energy(mu, 0.9, mu.metric(), opt).value;
  CHECK(below > r.value);
}

TEST_CASE("grids") {
  const auto g = geometric_grid(1e-3, 1.0, 4);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == 1e-3);
  CHECK(g[1] == doctest::Approx(1e-2));
  CHECK(g[3] == 1.0);
  CHECK_THROWS_AS(geometric_grid(1.0, 0.5, 4), ArgumentError);
}

TEST_CASE("correlation dimension of a segment, a square, and the Cantor set") {
  const EmpiricalMeasure seg = planar_segment(20000, 1);
  const auto est = correlation_dimension(seg, seg.metric(), default_radius_grid(seg));
  CHECK(std::abs(est.value - 1.0) < 0.05);
  CHECK(est.method == DimensionMethod::Correlation);
  CHECK(est.scales_used >= 3);

  const EmpiricalMeasure sq = uniform_cube(2, 20000, 2);
  CHECK(std::abs(correlation_dimension(sq, sq.metric(), default_radius_grid(sq)).value - 2.0) < 0.1);

  RngStream rng(3, 0);
  const EmpiricalMeasure cantor = chaos_game(catalogue_ifs("cantor"), 20000, rng);
  const auto c = correlation_dimension(cantor, cantor.metric(), default_radius_grid(cantor));
  CHECK(std::abs(c.value - std::log(2.0) / std::log(3.0)) < 0.05 + 2 * c.standard_error);

  const EmpiricalMeasure atom(MetricTag::euclidean(1), {1.0, 1.0, 1.0}, {0.2, 0.3, 0.5}, 1.0);
  CHECK_THROWS_AS(correlation_dimension(atom, atom.metric(), default_radius_grid(atom)), EstimationError);
  const std::vector<double> one_scale = {0.5};
  CHECK_THROWS_AS(correlation_dimension(sq, sq.metric(), one_scale), EstimationError);
}

TEST_CASE("center window removes the edge bias of a square") {
  const EmpiricalMeasure sq = uniform_cube(2, 20000, 4);
  CorrelationOptions opt;
  opt.center_window = Ball{{0.5, 0.5}, 0.3};
  const auto grid = geometric_grid(1e-3, 0.2, 25);
  const auto est = correlation_dimension(sq, sq.metric(), grid, opt);
  CHECK(std::abs(est.value - 2.0) < 0.05);
}

TEST_CASE("box dimension: square and dust") {
  const EmpiricalMeasure sq = uniform_cube(2, 100000, 5);
  const auto grid = geometric_grid(1.0 / 64, 1.0 / 4, 5);
  CHECK(std::abs(box_dimension(sq, grid).value - 2.0) < 0.05);

  RngStream rng(6, 0);
  const EmpiricalMeasure dust = chaos_game(catalogue_ifs("dust8_4"), 100000, rng);
  // Scales 4^-k line up with the construction.
  const std::vector<double> quad = {1.0 / 4, 1.0 / 16, 1.0 / 64, 1.0 / 256};
  const auto d = box_dimension(dust, quad);
  CHECK(std::abs(d.value - 1.5) < 0.05 + 2 * d.standard_error);
  CHECK(d.method == DimensionMethod::Box);

  std::vector<double> tiny = {0.3, 0.7};
  CHECK(box_count(tiny, MetricTag::euclidean(1), 0.5) == 2);
  CHECK(box_count(tiny, MetricTag::euclidean(1), 1.0) == 1);
}

TEST_CASE("Koranyi box dimension of the gauge ball and a sphere") {
  RngStream rng(7, 0);
  const EmpiricalMeasure ball = gauge_ball_sample(1, 200000, rng);
  BoxOptions opt;
  opt.window = Ball{{0.0, 0.0, 0.0}, 0.6};
  const auto grid = geometric_grid(0.06, 0.3, 8);
  const auto est = box_dimension(ball, grid, opt);
  CHECK(std::abs(est.value - 4.0) < 0.2);

  // Points of the unit gauge sphere: a 3-dimensional set.
  std::vector<double> pts;
  for (std::size_t i = 0; i < 200000; ++i) {
    const double a = 2 * std::numbers::pi * rng.uniform();
    const double c = 2 * rng.uniform() - 1;  // |z|^4 = 1 - c^2, 4t = c
    const double rz = std::pow(1 - c * c, 0.25);
    pts.insert(pts.end(), {rz * std::cos(a), rz * std::sin(a), c / 4});
  }
  const auto sphere = box_dimension(pts, MetricTag::koranyi(1), geometric_grid(0.03, 0.3, 10));
  CHECK(std::abs(sphere.value - 3.0) < 0.3);
}

TEST_CASE("positive measure proxy") {
  // A filled disc in R^2 has positive area.
  RngStream rng(8, 0);
  std::vector<double> disc;
  while (disc.size() < 2 * 100000) {
    const double x = 2 * rng.uniform() - 1, y = 2 * rng.uniform() - 1;
    if (x * x + y * y <= 1) disc.insert(disc.end(), {x, y});
  }
  const auto yes = positive_measure_proxy(EmpiricalMeasure::uniform(MetricTag::euclidean(2), disc), 2);
  CHECK(yes.positive);
  CHECK(yes.reason == "ok");

  // A segment in the plane does not.
  const auto no = positive_measure_proxy(planar_segment(20000, 9), 2);
  CHECK_FALSE(no.positive);

  // The Cantor measure on the line does not.
  const EmpiricalMeasure cantor = chaos_game(catalogue_ifs("cantor"), 20000, rng);
  CHECK_FALSE(positive_measure_proxy(cantor, 1).positive);

  // Uniform on an interval does.
  CHECK(positive_measure_proxy(uniform_cube(1, 20000, 10), 1).positive);

  const EmpiricalMeasure few = uniform_cube(1, 50, 11);
  const auto f = positive_measure_proxy(few, 1);
  CHECK_FALSE(f.positive);
  CHECK(f.reason.find("too few") != std::string::npos);
}
