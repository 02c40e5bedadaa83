#include "doctest.h"

#include <cmath>
#include <numeric>

#include "isoproj/parallel.hpp"
#include "isoproj/rng.hpp"
#include "isoproj/stats.hpp"

using namespace isoproj;

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differ_c |= x != c.next_u64();
    differ_d |= x != d.next_u64();
  }
  CHECK(differ_c);
  CHECK(differ_d);
  RngStream s(7, 3);
  RngStream s1 = s.split(1);
  s.next_u64();
  RngStream s2 = s.split(1);
  CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("rng moments") {
  RngStream rng(11, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  std::uint64_t below_hits[5] = {};
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_FALSE((u < 0 || u >= 1));
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    below_hits[rng.below(5)]++;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  for (auto h : below_hits) CHECK(std::abs(double(h) / n - 0.2) < 0.005);
}

TEST_CASE("neumaier sum recovers cancellation") {
  NeumaierSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 2.0);
}

TEST_CASE("line fit") {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual_rms < 1e-12);
  CHECK(f.slope_stderr < 1e-12);
  std::vector<double> y2{0, 1.1, 1.9, 3.2};
  const LineFit g = fit_line(x, y2);
  // numpy.polyfit reference: slope 1.04, intercept -0.01
  CHECK(g.slope == doctest::Approx(1.04));
  CHECK(g.intercept == doctest::Approx(-0.01));
}

TEST_CASE("quantiles") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.25) == 2.0);
}

TEST_CASE("kolmogorov-smirnov") {
  CHECK(ks_coefficient(0.01) == doctest::Approx(1.62762).epsilon(1e-5));
  CHECK(kolmogorov_survival(1.62762) == doctest::Approx(0.01).epsilon(0.01));
  RngStream rng(5, 0);
  std::vector<double> a, b, c;
  for (int i = 0; i < 5000; ++i) {
    a.push_back(rng.uniform());
    b.push_back(rng.uniform());
    c.push_back(std::pow(rng.uniform(), 1.3));
  }
  CHECK_FALSE(ks_two_sample(a, b).reject);
  CHECK(ks_two_sample(a, c).reject);
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK_FALSE(ks_one_sample(a, [](double x) { return x; }).reject);
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 5) throw std::runtime_error("boom");
  }));
}
