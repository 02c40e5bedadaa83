#include "doctest.h"

#include <cmath>

#include "isoproj/errors.hpp"
#include "isoproj/fractal.hpp"

using namespace isoproj;

TEST_CASE("catalogue dimensions solve the Moran equation") {
  CHECK(similarity_dimension(catalogue_ifs("cantor")) == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-10));
  CHECK(similarity_dimension(catalogue_ifs("dust3_5")) == doctest::Approx(std::log(3.0) / std::log(5.0)).epsilon(1e-10));
  CHECK(similarity_dimension(catalogue_ifs("dust8_4")) == doctest::Approx(1.5).epsilon(1e-10));
  // Embedding does not change the dimension.
  CHECK(similarity_dimension(catalogue_ifs("dust3_5", 4)) == doctest::Approx(std::log(3.0) / std::log(5.0)).epsilon(1e-10));
  CHECK_THROWS_AS(catalogue_ifs("nope"), ArgumentError);
}

TEST_CASE("IFS validation rejects overlapping or escaping maps") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const OrientedCube unit{{0.5}, 0.5, one};
  CHECK_NOTHROW(SimilarityIFS("halves", {{0.5, one, {0.0}}, {0.5, one, {0.5}}}, unit));
  CHECK_THROWS_AS(SimilarityIFS("overlap", {{0.6, one, {0.0}}, {0.6, one, {0.4}}}, unit), ArgumentError);
  CHECK_THROWS_AS(SimilarityIFS("escape", {{0.5, one, {0.0}}, {0.5, one, {0.7}}}, unit), ArgumentError);
  CHECK_THROWS_AS(SimilarityIFS("ratio", {{1.0, one, {0.0}}, {0.5, one, {0.5}}}, unit), ArgumentError);
  CHECK_THROWS_AS(SimilarityIFS("single", {{0.5, one, {0.0}}}, unit), ArgumentError);
}

TEST_CASE("chaos game stays in the witness and is reproducible") {
  for (const std::string name : {"cantor", "dust3_5", "dust8_4"}) {
    const SimilarityIFS ifs = catalogue_ifs(name, 4);
    RngStream rng(5, 1);
    const EmpiricalMeasure mu = chaos_game(ifs, 5000, rng);
    CHECK(mu.size() == 5000);
    CHECK(mu.total_mass() == 1.0);
    for (std::size_t i = 0; i < mu.size(); ++i) CHECK(ifs.witness().contains(mu.point(i)));
    RngStream again(5, 1);
    CHECK(chaos_game(ifs, 5000, again).points() == mu.points());
  }
}

TEST_CASE("chaos game samples the Cantor measure with mass 1/2 on each half") {
  RngStream rng(8, 2);
  const EmpiricalMeasure mu = chaos_game(catalogue_ifs("cantor"), 40000, rng);
  double left = 0, middle = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double x = mu.point(i)[0];
    if (x < 1.0 / 3.0) left += mu.weight(i);
    if (x > 1.0 / 3.0 + 1e-9 && x < 2.0 / 3.0 - 1e-9) middle += mu.weight(i);
  }
  CHECK(std::abs(left - 0.5) < 4 * 0.5 / std::sqrt(40000.0));
  CHECK(middle == 0.0);
}

TEST_CASE("product embedding spreads the set across all ambient directions") {
  const SimilarityIFS ifs = catalogue_ifs("dust3_5", 4);
  CHECK(ifs.dim() == 4);
  CHECK(ifs.name() == "dust3_5@R4");
  RngStream rng(3, 3);
  const EmpiricalMeasure mu = chaos_game(ifs, 2000, rng);
  // The set spans the plane of the first two rotation columns, which should
  // have no vanishing coordinate.
  const Eigen::MatrixXd q = embed_rotation(4, kEmbedRotationSeed);
  for (int k = 0; k < 4; ++k) CHECK(q.row(k).head(2).norm() > 1e-3);
  double spread[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (int k = 0; k < 4; ++k) spread[k] = std::max(spread[k], std::abs(mu.point(i)[k] - mu.point(0)[k]));
  for (double s : spread) CHECK(s > 1e-3);
  CHECK_THROWS_AS(product_embed(catalogue_ifs("dust8_4"), 2), ArgumentError);
  CHECK((embed_rotation(4, 1) - embed_rotation(4, 2)).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("Frostman check: grids are bounded, atoms are not") {
  const std::size_t n = 1000;
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  const EmpiricalMeasure grid = EmpiricalMeasure::uniform(MetricTag::euclidean(1), pts);
  const std::vector<double> radii = {1e-3, 3e-3, 1e-2, 0.03, 0.1, 0.3, 1.0};
  // A closed interval of length 2r holds at most 2rN + 1 grid points.
  const FrostmanReport g = frostman_exponent_check(grid, 1.0, radii, {3.0 + 1e-9, 0, 1});
  CHECK(g.pass);
  CHECK(g.worst_ratio <= 3.0 + 1e-9);

  const EmpiricalMeasure atom(MetricTag::euclidean(1), {0.25, 0.25}, {0.5, 0.5}, 1.0);
  const std::vector<double> small = {1e-4, 1e-2};
  const FrostmanReport a = frostman_exponent_check(atom, 1.0, small);
  CHECK_FALSE(a.pass);
  CHECK(a.worst_ratio == doctest::Approx(1e4));
  CHECK(a.worst_radius == 1e-4);
  CHECK(a.worst_point == Point{0.25});
}

TEST_CASE("Frostman check on the Cantor measure: bounded at its dimension only") {
  RngStream rng(21, 0);
  const EmpiricalMeasure mu = chaos_game(catalogue_ifs("cantor"), 20000, rng);
  const std::vector<double> coarse = {0.1, 0.3, 1.0};
  const std::vector<double> fine = {1e-4, 3e-4, 1e-3};
  const double s = std::log(2.0) / std::log(3.0);
  FrostmanOptions opt;
  opt.max_centers = 500;
  const FrostmanReport at_s = frostman_exponent_check(mu, s, fine, opt);
  CHECK(at_s.pass);
  // Above the dimension the ratio grows like r^{s - t} as r shrinks.
  const double hi_fine = frostman_exponent_check(mu, 0.75, fine, opt).worst_ratio;
  const double hi_coarse = frostman_exponent_check(mu, 0.75, coarse, opt).worst_ratio;
  CHECK(hi_fine > 1.5 * hi_coarse);
}
