#pragma once

// Weighted point clouds standing in for compactly supported Radon measures.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace isoproj {

/// Euclidean distance on R^d, or the Koranyi gauge distance on H^n, whose
/// points are stored as (z_1..z_2n, t).
class MetricTag {
public:
  enum class Kind { Euclidean, Koranyi };

  static MetricTag euclidean(std::size_t dimension);
  static MetricTag koranyi(int n);

  Kind kind() const { return kind_; }
  bool is_koranyi() const { return kind_ == Kind::Koranyi; }
  /// Coordinates per point: d, or 2n + 1.
  std::size_t point_dim() const { return dim_; }
  int heisenberg_n() const { return static_cast<int>((dim_ - 1) / 2); }

  /// d(p, q) for points of point_dim() coordinates.
  double distance(std::span<const double> p, std::span<const double> q) const;

  std::string name() const;
  bool operator==(const MetricTag&) const = default;

private:
  MetricTag(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}
  Kind kind_;
  std::size_t dim_;
};

class EmpiricalMeasure {
public:
  /// Points are row-major, point_dim() values each. Validates finiteness,
  /// nonnegative weights, and that the weights add up to the declared mass
  /// within 1e-12 (relative to max(1, mass)).
  EmpiricalMeasure(MetricTag metric, std::vector<double> points, std::vector<double> weights,
                   double total_mass);

  /// Equal weights total_mass / count.
  static EmpiricalMeasure uniform(MetricTag metric, std::vector<double> points,
                                  double total_mass = 1.0);

  const MetricTag& metric() const { return metric_; }
  std::size_t dim() const { return metric_.point_dim(); }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  double total_mass() const { return total_mass_; }

  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim(), dim()}; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Points whose indices satisfy `keep`, weights scaled by `scale`.
  EmpiricalMeasure restrict(const std::function<bool(std::size_t)>& keep, double scale = 1.0) const;

  /// Deterministic strided subsample of at most `max_points` points, weights
  /// rescaled so the total mass is unchanged.
  EmpiricalMeasure subsample(std::size_t max_points) const;

  /// Upper bound of the support diameter: the bounding-box diagonal
  /// (Euclidean) or twice the largest distance from the first point (Koranyi).
  double diameter_bound() const;

  /// CSV with a header row: coordinates (x1.. or z1..z2n,t) then weight.
  void write_csv(std::ostream& out) const;

private:
  MetricTag metric_;
  std::vector<double> points_;
  std::vector<double> weights_;
  double total_mass_;
};

using PointMap = std::function<void(std::span<const double> in, std::span<double> out)>;

/// Image measure: same weights, mapped points; `metric` describes the target.
EmpiricalMeasure pushforward(const EmpiricalMeasure& measure, const PointMap& map,
                             MetricTag metric);

}  // namespace isoproj
