#pragma once

// Riesz energies and dimension estimators for empirical measures.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isoproj/measure.hpp"
#include "isoproj/pairwise.hpp"
#include "isoproj/symplectic.hpp"

namespace isoproj {

struct RieszEnergy {
  /// U-statistic sum_{i != j} p_i p_j d^{-s} / (1 - sum p_i^2) times mass^2,
  /// with p the normalized weights.
  double value = 0.0;
  /// The raw double sum sum_{i != j} w_i w_j d^{-s}.
  double pair_sum = 0.0;
  /// Ordered coincident pairs (d = 0) left out of both sums.
  std::uint64_t coincident_pairs = 0;
  double coincident_weight = 0.0;
  std::size_t points_used = 0;
};

/// Throws ArgumentError for s <= 0 or fewer than two points, and
/// DegenerateMeasureError when every pair is coincident.
RieszEnergy riesz_energy(const EmpiricalMeasure& measure, double s, const MetricTag& metric,
                         const PairOptions& options = {});

struct MutualEnergy {
  double value = 0.0;  // sum_{i,j} w_i v_j d^{-s} over non-coincident cross pairs
  std::uint64_t coincident_pairs = 0;
  double coincident_weight = 0.0;
};

MutualEnergy mutual_energy(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double s,
                           const MetricTag& metric, const PairOptions& options = {});

enum class DimensionMethod { Box, Correlation };
std::string to_string(DimensionMethod m);

struct DimensionEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double residual = 0.0;  // RMS of the log-log fit
  DimensionMethod method = DimensionMethod::Correlation;
  std::size_t scales_used = 0;
  std::size_t points_used = 0;
  /// Full curve: radii with log C(r) or log N(r) (NaN where empty).
  std::vector<double> radii;
  std::vector<double> log_values;
};

/// count radii from r_min to r_max, equally spaced in log r.
std::vector<double> geometric_grid(double r_min, double r_max, std::size_t count);

/// Grid spanning `decades` decades below the support diameter bound.
std::vector<double> default_radius_grid(const EmpiricalMeasure& measure, std::size_t count = 40,
                                        double decades = 6.0);

/// Ball in the estimator's metric.
struct Ball {
  Point center;
  double radius = 0.0;
};

struct CorrelationOptions {
  PairOptions pairs;
  /// Smallest radii are dropped until at least this many pairs lie within r.
  std::uint64_t min_pairs = 100;
  /// Largest radii are dropped until C(r) <= max_fraction.
  double max_fraction = 0.5;
  /// Radii below this are ignored.
  double r_floor = 0.0;
  /// When set, only points inside this ball serve as pair centers; they are
  /// still paired with every point. Removes the edge bias of bounded supports.
  std::optional<Ball> center_window;
};

/// Slope of log C(r) against log r, C(r) the weighted fraction of distinct
/// pairs within distance r. Throws EstimationError with fewer than three
/// usable radii.
DimensionEstimate correlation_dimension(const EmpiricalMeasure& measure, const MetricTag& metric,
                                        std::span<const double> r_grid,
                                        const CorrelationOptions& options = {});

/// How Koranyi box counts cover the set at scale r.
enum class KoranyiCover {
  /// Tiles delta_r(gamma * F) for gamma in the lattice Z^{2n} x (1/2)Z and
  /// F = [0,1)^{2n} x [0,1/2): left translates of one dilated fundamental
  /// domain, so every tile has the same gauge shape.
  LatticeTiles,
  /// Greedy r-nets built in point order. Their counts converge slowly in the
  /// number of sample points, which biases the slope low.
  GreedyNet,
};

struct BoxOptions {
  /// Scales with fewer points per occupied box than this are saturated.
  double min_points_per_box = 10.0;
  /// Scales with fewer boxes than this are too coarse.
  std::size_t min_boxes = 8;
  /// When set, only boxes (cells or net centers) whose representative point
  /// lies in this ball are counted.
  std::optional<Ball> window;
  KoranyiCover koranyi_cover = KoranyiCover::LatticeTiles;
};

/// Euclidean: cells [k r, (k+1) r)^d anchored at the origin. Koranyi: see
/// KoranyiCover. Slope of log N(r) against log(1/r).
DimensionEstimate box_dimension(std::span<const double> points, const MetricTag& metric,
                                std::span<const double> r_grid, const BoxOptions& options = {});
DimensionEstimate box_dimension(const EmpiricalMeasure& measure, std::span<const double> r_grid,
                                const BoxOptions& options = {});

/// Number of boxes at scale r (see box_dimension).
std::size_t box_count(std::span<const double> points, const MetricTag& metric, double r,
                      const std::optional<Ball>& window = std::nullopt,
                      KoranyiCover cover = KoranyiCover::LatticeTiles);

struct ProxyOptions {
  double dimension_tolerance = 0.1;
  /// The densest-cell mass must scale at least like r^{fraction * m}. An
  /// L^2 density f gives mu(Q) <= |f|_2 |Q|^{1/2}, hence the default 1/2;
  /// atoms give exponent 0.
  double cell_exponent_fraction = 0.5;
  /// Minimum mean points per occupied cell for a scale to count. The maximum
  /// over cells is biased up by sampling noise when cells hold few points.
  double min_cell_points = 100.0;
  std::size_t min_points = 200;
  CorrelationOptions correlation;
};

struct ProxyReport {
  bool positive = false;
  std::optional<DimensionEstimate> correlation;
  double cell_exponent = 0.0;
  std::vector<double> cell_scales;
  std::vector<double> max_cell_mass;
  std::string reason;
};

/// Decidable stand-in for "positive m-dimensional measure" of a measure
/// given in m chart coordinates: correlation dimension >= m - tolerance and
/// no concentration of mass in small dyadic cells.
ProxyReport positive_measure_proxy(const EmpiricalMeasure& measure, int m,
                                   const ProxyOptions& options = {});

}  // namespace isoproj
