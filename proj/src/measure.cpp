#include "isoproj/measure.hpp"

#include <cmath>
#include <ostream>

#include "isoproj/errors.hpp"
#include "isoproj/stats.hpp"

namespace isoproj {

MetricTag MetricTag::euclidean(std::size_t dimension) {
  if (dimension == 0) throw ArgumentError("MetricTag: dimension must be positive");
  return MetricTag(Kind::Euclidean, dimension);
}

MetricTag MetricTag::koranyi(int n) {
  if (n < 1) throw ArgumentError("MetricTag: Heisenberg n must be >= 1");
  return MetricTag(Kind::Koranyi, 2 * static_cast<std::size_t>(n) + 1);
}

double MetricTag::distance(std::span<const double> p, std::span<const double> q) const {
  if (p.size() != dim_ || q.size() != dim_) throw ArgumentError("distance: dimension mismatch");
  if (kind_ == Kind::Euclidean) {
    double s = 0;
    for (std::size_t i = 0; i < dim_; ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
    return std::sqrt(s);
  }
  const std::size_t n = (dim_ - 1) / 2;
  double z2 = 0, w = 0;
  for (std::size_t i = 0; i < 2 * n; ++i) z2 += (p[i] - q[i]) * (p[i] - q[i]);
  for (std::size_t i = 0; i < n; ++i) w += q[i] * p[n + i] - q[n + i] * p[i];
  const double dt = (p[2 * n] - q[2 * n]) + 0.5 * w;
  return std::sqrt(std::sqrt(z2 * z2 + 16.0 * (dt * dt)));
}

std::string MetricTag::name() const {
  return kind_ == Kind::Euclidean ? "euclidean(" + std::to_string(dim_) + ")"
                                  : "koranyi(" + std::to_string(heisenberg_n()) + ")";
}

EmpiricalMeasure::EmpiricalMeasure(MetricTag metric, std::vector<double> points,
                                   std::vector<double> weights, double total_mass)
    : metric_(metric), points_(std::move(points)), weights_(std::move(weights)),
      total_mass_(total_mass) {
  if (points_.size() != weights_.size() * dim()) {
    throw ArgumentError("EmpiricalMeasure: points and weights disagree in count");
  }
  for (double v : points_) {
    if (!std::isfinite(v)) throw ArgumentError("EmpiricalMeasure: non-finite coordinate");
  }
  NeumaierSum sum;
  for (double w : weights_) {
    if (!(w >= 0) || !std::isfinite(w)) throw ArgumentError("EmpiricalMeasure: bad weight");
    sum.add(w);
  }
  if (std::abs(sum.value() - total_mass_) > 1e-12 * std::max(1.0, std::abs(total_mass_))) {
    throw ArgumentError("EmpiricalMeasure: weights do not sum to the declared mass");
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(MetricTag metric, std::vector<double> points,
                                           double total_mass) {
  const std::size_t count = points.size() / metric.point_dim();
  std::vector<double> weights(count, count ? total_mass / static_cast<double>(count) : 0.0);
  NeumaierSum sum;
  for (double w : weights) sum.add(w);
  return EmpiricalMeasure(metric, std::move(points), std::move(weights),
                          count ? sum.value() : 0.0);
}

EmpiricalMeasure EmpiricalMeasure::restrict(const std::function<bool(std::size_t)>& keep,
                                            double scale) const {
  std::vector<double> pts, ws;
  NeumaierSum mass;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!keep(i)) continue;
    const auto p = point(i);
    pts.insert(pts.end(), p.begin(), p.end());
    ws.push_back(weights_[i] * scale);
    mass.add(weights_[i] * scale);
  }
  return EmpiricalMeasure(metric_, std::move(pts), std::move(ws), mass.value());
}

EmpiricalMeasure EmpiricalMeasure::subsample(std::size_t max_points) const {
  if (max_points == 0) throw ArgumentError("subsample: max_points must be positive");
  if (size() <= max_points) return *this;
  std::vector<double> pts;
  std::vector<double> ws;
  pts.reserve(max_points * dim());
  ws.reserve(max_points);
  NeumaierSum kept;
  for (std::size_t k = 0; k < max_points; ++k) {
    const std::size_t i = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(k) * size()) / max_points);
    const auto p = point(i);
    pts.insert(pts.end(), p.begin(), p.end());
    ws.push_back(weights_[i]);
    kept.add(weights_[i]);
  }
  if (kept.value() <= 0) throw DegenerateMeasureError("subsample: kept points carry no mass");
  const double scale = total_mass_ / kept.value();
  NeumaierSum mass;
  for (double& w : ws) {
    w *= scale;
    mass.add(w);
  }
  return EmpiricalMeasure(metric_, std::move(pts), std::move(ws), mass.value());
}

double EmpiricalMeasure::diameter_bound() const {
  if (size() < 2) return 0.0;
  if (!metric_.is_koranyi()) {
    double s = 0;
    for (std::size_t k = 0; k < dim(); ++k) {
      double lo = points_[k], hi = points_[k];
      for (std::size_t i = 1; i < size(); ++i) {
        lo = std::min(lo, points_[i * dim() + k]);
        hi = std::max(hi, points_[i * dim() + k]);
      }
      s += (hi - lo) * (hi - lo);
    }
    return std::sqrt(s);
  }
  double far = 0;
  for (std::size_t i = 1; i < size(); ++i) far = std::max(far, metric_.distance(point(0), point(i)));
  return 2.0 * far;
}

void EmpiricalMeasure::write_csv(std::ostream& out) const {
  const std::size_t d = dim();
  for (std::size_t k = 0; k < d; ++k) {
    if (metric_.is_koranyi()) {
      out << (k + 1 == d ? std::string("t") : "z" + std::to_string(k + 1)) << ',';
    } else {
      out << 'x' << (k + 1) << ',';
    }
  }
  out << "weight\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    for (double v : point(i)) out << v << ',';
    out << weights_[i] << '\n';
  }
  out.precision(old);
}

EmpiricalMeasure pushforward(const EmpiricalMeasure& measure, const PointMap& map,
                             MetricTag metric) {
  std::vector<double> pts(measure.size() * metric.point_dim());
  for (std::size_t i = 0; i < measure.size(); ++i) {
    map(measure.point(i), std::span<double>(pts.data() + i * metric.point_dim(), metric.point_dim()));
  }
  return EmpiricalMeasure(metric, std::move(pts), measure.weights(), measure.total_mass());
}

}  // namespace isoproj
