#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "isoproj/kernels.hpp"
#include "isoproj/measure.hpp"
#include "isoproj/pairwise.hpp"
#include "isoproj/rng.hpp"

using namespace isoproj;

namespace {

EmpiricalMeasure random_cloud(MetricTag metric, std::size_t count, std::uint64_t seed,
                              bool duplicates = false) {
  RngStream rng(seed, 0);
  std::vector<double> pts(count * metric.point_dim());
  for (auto& v : pts) v = rng.uniform() * 2 - 1;
  if (duplicates) {
    for (std::size_t i = 1; i < count; i += 7)
      for (std::size_t k = 0; k < metric.point_dim(); ++k)
        pts[i * metric.point_dim() + k] = pts[(i - 1) * metric.point_dim() + k];
  }
  std::vector<double> w(count);
  double total = 0;
  for (auto& v : w) total += (v = 0.5 + rng.uniform());
  return EmpiricalMeasure(metric, pts, w, total);
}

}  // namespace

TEST_CASE("bin table counts thresholds strictly below v") {
  const std::vector<double> t{1.0, 2.0, 3.0};
  const kernels::BinTable table(t);
  CHECK(table.bins() == 4);
  CHECK(table.bin(0.0) == 0);
  CHECK(table.bin(0.5) == 0);
  CHECK(table.bin(1.0) == 0);
  CHECK(table.bin(1.5) == 1);
  CHECK(table.bin(3.0) == 2);
  CHECK(table.bin(4.0) == 3);
  CHECK_THROWS(kernels::BinTable(std::vector<double>{2.0, 1.0}));
  CHECK_THROWS(kernels::BinTable(std::vector<double>{0.0, 1.0}));

  // Dense and repeated thresholds against a linear count.
  RngStream rng(3, 0);
  std::vector<double> dense;
  for (int k = 0; k < 50; ++k) dense.push_back(1.0 + 0.001 * k);
  dense.push_back(1.0);
  dense.push_back(1e-20);
  dense.push_back(1e20);
  std::sort(dense.begin(), dense.end());
  const kernels::BinTable d(dense);
  for (int trial = 0; trial < 20000; ++trial) {
    const double v = trial % 2 ? 0.95 + 0.1 * rng.uniform() : std::exp(100 * (rng.uniform() - 0.5));
    std::size_t below = 0;
    for (double x : dense) below += x < v;
    CHECK(d.bin(v) == below);
  }
  for (double x : dense) CHECK(d.bin(x) == static_cast<std::size_t>(std::lower_bound(dense.begin(), dense.end(), x) - dense.begin()));
}

TEST_CASE("inverse power fast paths agree with pow") {
  for (double v : {1e-12, 0.003, 0.5, 1.0, 7.5, 1e9}) {
    for (double e : {0.125, 0.25, 0.5, 1.0, 0.3155, 0.75, 1.6}) {
      const double ref = std::pow(v, -e);
      CHECK(std::abs(kernels::inverse_power(v, e) / ref - 1) < 1e-14);
    }
  }
}

TEST_CASE("scalar kernels match brute force") {
  for (auto metric : {MetricTag::euclidean(3), MetricTag::koranyi(1)}) {
    const EmpiricalMeasure m = random_cloud(metric, 300, 5);
    const std::vector<double> radii{0.1, 0.3, 0.7, 1.2};
    const PairCorrelation pc = pair_correlation(m, metric, radii, 1);
    std::vector<std::uint64_t> cnt(radii.size(), 0);
    double energy = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        const double d = metric.distance(m.point(i), m.point(j));
        for (std::size_t k = 0; k < radii.size(); ++k) cnt[k] += d <= radii[k];
        energy += m.weight(i) * m.weight(j) * std::pow(d, -0.7);
      }
    CHECK(pc.total_pairs == 300u * 299 / 2);
    for (std::size_t k = 0; k < radii.size(); ++k) {
      // Boundary ties between d <= r and d^p <= r^p are measure zero here.
      CHECK(pc.pair_counts[k] == cnt[k]);
    }
    const EnergySum e = self_energy_sum(m, metric, 0.7, 1);
    CHECK(e.sum == doctest::Approx(energy).epsilon(1e-12));
  }
}

TEST_CASE("avx2 kernels are equivalent to the scalar reference") {
  const kernels::KernelTable* simd = kernels::avx2_kernels();
  if (simd == nullptr) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  const kernels::KernelTable& ref = kernels::scalar_kernels();
  for (auto metric : {MetricTag::euclidean(1), MetricTag::euclidean(4), MetricTag::koranyi(1),
                      MetricTag::koranyi(2)}) {
    for (std::size_t count : {1u, 5u, 37u, 513u}) {
      const EmpiricalMeasure m = random_cloud(metric, count, 100 + count, true);
      const kernels::SoaCloud soa = kernels::to_soa(m);
      std::vector<double> thr;
      for (int k = 0; k < 11; ++k) thr.push_back(metric_power(metric, 0.02 * std::pow(1.6, k)));
      const kernels::BinTable bins(thr);
      for (bool upper : {true, false}) {
        kernels::PairBlock blk{&soa, 0, count, &soa, 0, count, upper};
        std::vector<std::uint64_t> c1(bins.bins()), c2(bins.bins());
        std::vector<double> w1(bins.bins()), w2(bins.bins());
        ref.histogram(blk, pair_metric(metric), bins, c1.data(), w1.data());
        simd->histogram(blk, pair_metric(metric), bins, c2.data(), w2.data());
        CHECK(c1 == c2);
        CHECK(w1 == w2);
        for (double s : {0.25, 0.5, 1.0, 0.63, 1.5, 3.0}) {
          const double ex = s / (metric.is_koranyi() ? 4.0 : 2.0);
          kernels::EnergyPartial e1, e2;
          ref.energy(blk, pair_metric(metric), ex, e1);
          simd->energy(blk, pair_metric(metric), ex, e2);
          CHECK(e1.coincident == e2.coincident);
          CHECK(e1.coincident_weight == doctest::Approx(e2.coincident_weight).epsilon(1e-13));
          CHECK(e1.sum == doctest::Approx(e2.sum).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("pairwise drivers do not depend on the thread count") {
  const EmpiricalMeasure m = random_cloud(MetricTag::euclidean(2), 2000, 9);
  const std::vector<double> radii{0.05, 0.1, 0.2, 0.4};
  const PairCorrelation a = pair_correlation(m, m.metric(), radii, 1);
  const PairCorrelation b = pair_correlation(m, m.metric(), radii, 3);
  CHECK(a.pair_counts == b.pair_counts);
  CHECK(a.pair_weights == b.pair_weights);
  CHECK(self_energy_sum(m, m.metric(), 0.5, 1).sum == self_energy_sum(m, m.metric(), 0.5, 4).sum);
}
