#pragma once

// Tiled drivers over the pair kernels. Work is cut into fixed row blocks;
// each block reduces into its own slot and slots are combined in block
// order, so results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isoproj/kernels.hpp"
#include "isoproj/measure.hpp"

namespace isoproj {

struct PairOptions {
  unsigned threads = 1;
  /// O(N^2) kernels run on a strided subsample of at most this many points.
  std::size_t max_points = 20000;
  /// Use every point regardless of max_points.
  bool full_pairs = false;
};

/// Cumulative pair statistics at each radius: pairs (i < j) with d <= r.
struct PairCorrelation {
  std::vector<double> radii;
  std::vector<std::uint64_t> pair_counts;
  std::vector<double> pair_weights;  // sum of w_i w_j over those pairs
  std::uint64_t total_pairs = 0;
  double total_weight = 0.0;         // sum over all i < j of w_i w_j
  std::size_t points_used = 0;
};

kernels::PairMetric pair_metric(const MetricTag& metric);
/// r^2 for Euclidean, r^4 for Koranyi.
double metric_power(const MetricTag& metric, double r);

/// Pair correlation over all distinct pairs of `measure` (already subsampled
/// by the caller if desired). Radii must be sorted ascending.
PairCorrelation pair_correlation(const EmpiricalMeasure& measure, const MetricTag& metric,
                                 std::span<const double> radii, unsigned threads = 1);

/// Ordered pairs (i, j), i in `rows`, j any other point of the measure.
/// Totals cover the same pairs.
PairCorrelation pair_correlation_rows(const EmpiricalMeasure& measure, const MetricTag& metric,
                                      std::span<const std::size_t> rows,
                                      std::span<const double> radii, unsigned threads = 1);

/// For each center index c and radius r_k: mass of the closed ball B(x_c, r_k)
/// (center included). Result is row-major centers x radii.
std::vector<double> ball_masses(const EmpiricalMeasure& measure, const MetricTag& metric,
                                std::span<const std::size_t> centers,
                                std::span<const double> radii, unsigned threads = 1);

struct EnergySum {
  double sum = 0.0;  // sum over visited pairs of w w' d^{-s}, d > 0
  double coincident_weight = 0.0;
  std::uint64_t coincident_pairs = 0;
};

/// Distinct unordered pairs of one cloud (each pair once).
EnergySum self_energy_sum(const EmpiricalMeasure& measure, const MetricTag& metric, double s,
                          unsigned threads = 1);
/// All ordered cross pairs of two clouds.
EnergySum cross_energy_sum(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const MetricTag& metric, double s, unsigned threads = 1);

}  // namespace isoproj
