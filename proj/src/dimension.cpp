#include "isoproj/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "isoproj/errors.hpp"
#include "isoproj/rng.hpp"
#include "isoproj/stats.hpp"

namespace isoproj {

namespace {

EmpiricalMeasure working_copy(const EmpiricalMeasure& m, const PairOptions& opt) {
  if (opt.full_pairs || m.size() <= opt.max_points) return m;
  return m.subsample(opt.max_points);
}

void check_metric(std::size_t dim, const MetricTag& metric) {
  if (metric.point_dim() != dim) {
    throw ArgumentError("metric " + metric.name() + " does not fit points of dimension " +
                        std::to_string(dim));
  }
}

bool in_ball(const MetricTag& metric, std::span<const double> p, const Ball& ball) {
  return metric.distance(p, ball.center) <= ball.radius;
}

std::vector<double> sorted_grid(std::span<const double> r_grid) {
  std::vector<double> g(r_grid.begin(), r_grid.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  for (double r : g) {
    if (!(r > 0) || !std::isfinite(r)) throw ArgumentError("radius grid must be positive and finite");
  }
  return g;
}

DimensionEstimate fit_estimate(DimensionMethod method, const std::vector<double>& radii,
                               const std::vector<double>& log_values,
                               const std::vector<bool>& usable, double sign, std::size_t points) {
  std::vector<double> x, y;
  DimensionEstimate est;
  est.method = method;
  est.points_used = points;
  est.radii = radii;
  est.log_values = log_values;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!usable[k]) continue;
    x.push_back(std::log(radii[k]));
    y.push_back(log_values[k]);
  }
  if (x.size() < 3) {
    throw EstimationError(to_string(method) + " dimension: only " + std::to_string(x.size()) +
                          " usable scales (need 3)");
  }
  const LineFit f = fit_line(x, y);
  est.value = std::max(0.0, sign * f.slope);
  est.standard_error = f.slope_stderr;
  est.residual = f.residual_rms;
  est.scales_used = x.size();
  est.r_min = std::exp(x.front());
  est.r_max = std::exp(x.back());
  return est;
}

struct CellKeyLess {
  const std::vector<std::int64_t>* keys;
  std::size_t dim;
  bool operator()(std::size_t a, std::size_t b) const {
    const std::int64_t* ka = keys->data() + a * dim;
    const std::int64_t* kb = keys->data() + b * dim;
    return std::lexicographical_compare(ka, ka + dim, kb, kb + dim);
  }
};

struct CellScan {
  std::size_t boxes = 0;
  std::size_t covered_points = 0;
  double max_mass = 0.0;
};

// Distinct origin-anchored cells of side r.
CellScan scan_cells(std::span<const double> points, std::size_t dim, double r,
                    std::span<const double> weights, const std::optional<Ball>& window,
                    const MetricTag& metric) {
  const std::size_t n = points.size() / dim;
  std::vector<std::int64_t> keys(n * dim);
  for (std::size_t i = 0; i < n * dim; ++i) {
    keys[i] = static_cast<std::int64_t>(std::floor(points[i] / r));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), CellKeyLess{&keys, dim});
  CellScan scan;
  Point center(dim);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    const std::int64_t* ki = keys.data() + order[i] * dim;
    while (j < n && std::equal(ki, ki + dim, keys.data() + order[j] * dim)) ++j;
    bool counted = true;
    if (window) {
      for (std::size_t k = 0; k < dim; ++k) center[k] = (static_cast<double>(ki[k]) + 0.5) * r;
      counted = in_ball(metric, center, *window);
    }
    if (counted) {
      ++scan.boxes;
      scan.covered_points += j - i;
      if (!weights.empty()) {
        double mass = 0;
        for (std::size_t t = i; t < j; ++t) mass += weights[order[t]];
        scan.max_mass = std::max(scan.max_mass, mass);
      }
    }
    i = j;
  }
  return scan;
}

// Heisenberg lattice tiles at scale r. The tile of p is gamma * F after
// undoing the dilation, gamma = (a, c) with a = floor(z / r) and c chosen so
// that the t coordinate of gamma^{-1} * delta_{1/r}(p) lies in [0, 1/2).
CellScan scan_koranyi_tiles(std::span<const double> points, const MetricTag& metric, double r,
                            const std::optional<Ball>& window) {
  const std::size_t dim = metric.point_dim();
  const std::size_t zd = dim - 1;
  const std::size_t half = zd / 2;
  const std::size_t n = points.size() / dim;
  std::vector<std::int64_t> keys(n * dim);
  std::vector<double> z(zd);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = points.data() + i * dim;
    std::int64_t* key = keys.data() + i * dim;
    for (std::size_t k = 0; k < zd; ++k) {
      z[k] = p[k] / r;
      key[k] = static_cast<std::int64_t>(std::floor(z[k]));
    }
    double w = 0;
    for (std::size_t k = 0; k < half; ++k) {
      w += static_cast<double>(key[k]) * z[half + k] - static_cast<double>(key[half + k]) * z[k];
    }
    key[zd] = static_cast<std::int64_t>(std::floor(2.0 * (p[zd] / (r * r) + 0.5 * w)));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), CellKeyLess{&keys, dim});
  CellScan scan;
  Point base(dim);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    const std::int64_t* ki = keys.data() + order[i] * dim;
    while (j < n && std::equal(ki, ki + dim, keys.data() + order[j] * dim)) ++j;
    bool counted = true;
    if (window) {
      for (std::size_t k = 0; k < zd; ++k) base[k] = static_cast<double>(ki[k]) * r;
      base[zd] = 0.5 * static_cast<double>(ki[zd]) * r * r;
      counted = in_ball(metric, base, *window);
    }
    if (counted) {
      ++scan.boxes;
      scan.covered_points += j - i;
    }
    i = j;
  }
  return scan;
}

std::uint64_t hash_cell(const std::int64_t* c, std::size_t dim) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t k = 0; k < dim; ++k) h = mix64(h ^ static_cast<std::uint64_t>(c[k]));
  return h;
}

// Greedy r-net in the Koranyi gauge; grid buckets only prune candidates,
// every candidate is checked with the exact distance.
CellScan scan_koranyi_net(std::span<const double> points, const MetricTag& metric, double r,
                          const std::optional<Ball>& window) {
  const std::size_t dim = metric.point_dim();
  const std::size_t zd = dim - 1;
  const std::size_t n = points.size() / dim;
  double zmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double z2 = 0;
    for (std::size_t k = 0; k < zd; ++k) z2 += points[i * dim + k] * points[i * dim + k];
    zmax = std::max(zmax, std::sqrt(z2));
  }
  // |dt| <= r^2/4 + r |z| / 2 for points within r of each other.
  const double ht = r * r + 0.125 * r * zmax;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  std::vector<std::uint32_t> centers;
  std::vector<std::size_t> assigned;
  std::vector<std::int64_t> cell(dim), probe(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> p = points.subspan(i * dim, dim);
    double z2 = 0;
    for (std::size_t k = 0; k < zd; ++k) {
      cell[k] = static_cast<std::int64_t>(std::floor(p[k] / r));
      z2 += p[k] * p[k];
    }
    cell[zd] = static_cast<std::int64_t>(std::floor(p[zd] / ht));
    const double tbound = 0.25 * r * r + 0.5 * r * (std::sqrt(z2) + r);
    const std::int64_t tspan = static_cast<std::int64_t>(std::ceil(tbound / ht));
    std::int64_t found = -1;
    // Odometer over the neighbor cells.
    std::vector<std::int64_t> offset(dim, -1);
    offset[zd] = -tspan;
    for (;;) {
      for (std::size_t k = 0; k < dim; ++k) probe[k] = cell[k] + offset[k];
      const auto it = buckets.find(hash_cell(probe.data(), dim));
      if (it != buckets.end()) {
        for (std::uint32_t c : it->second) {
          if (metric.distance(p, points.subspan(std::size_t{c} * dim, dim)) <= r) {
            found = c;
            break;
          }
        }
      }
      if (found >= 0) break;
      std::size_t k = 0;
      for (; k < dim; ++k) {
        const std::int64_t lim = k == zd ? tspan : 1;
        if (++offset[k] <= lim) break;
        offset[k] = k == zd ? -tspan : -1;
      }
      if (k == dim) break;
    }
    if (found >= 0) {
      const auto pos = std::lower_bound(centers.begin(), centers.end(), static_cast<std::uint32_t>(found));
      ++assigned[static_cast<std::size_t>(pos - centers.begin())];
    } else {
      centers.push_back(static_cast<std::uint32_t>(i));
      assigned.push_back(1);
      buckets[hash_cell(cell.data(), dim)].push_back(static_cast<std::uint32_t>(i));
    }
  }
  CellScan scan;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (window && !in_ball(metric, points.subspan(std::size_t{centers[c]} * dim, dim), *window)) {
      continue;
    }
    ++scan.boxes;
    scan.covered_points += assigned[c];
  }
  return scan;
}

}  // namespace

RieszEnergy riesz_energy(const EmpiricalMeasure& measure, double s, const MetricTag& metric,
                         const PairOptions& options) {
  if (!(s > 0)) throw ArgumentError("riesz_energy: s must be positive");
  if (measure.size() < 2) throw ArgumentError("riesz_energy: need at least two points");
  check_metric(measure.dim(), metric);
  const EmpiricalMeasure work = working_copy(measure, options);
  const EnergySum e = self_energy_sum(work, metric, s, options.threads);
  const std::uint64_t n = work.size();
  if (e.coincident_pairs == n * (n - 1) / 2) {
    throw DegenerateMeasureError("riesz_energy: every pair of points is coincident");
  }
  const double mass = work.total_mass();
  if (!(mass > 0)) throw DegenerateMeasureError("riesz_energy: measure has no mass");
  NeumaierSum sq;
  for (double w : work.weights()) sq.add((w / mass) * (w / mass));
  RieszEnergy out;
  out.pair_sum = 2.0 * e.sum;
  out.coincident_pairs = 2 * e.coincident_pairs;
  out.coincident_weight = 2.0 * e.coincident_weight;
  out.points_used = work.size();
  const double denom = 1.0 - sq.value();
  if (!(denom > 0)) throw DegenerateMeasureError("riesz_energy: a single atom carries all mass");
  out.value = out.pair_sum / denom;
  return out;
}

MutualEnergy mutual_energy(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double s,
                           const MetricTag& metric, const PairOptions& options) {
  if (!(s > 0)) throw ArgumentError("mutual_energy: s must be positive");
  check_metric(mu.dim(), metric);
  check_metric(nu.dim(), metric);
  const EnergySum e = cross_energy_sum(working_copy(mu, options), working_copy(nu, options), metric,
                                       s, options.threads);
  return {e.sum, e.coincident_pairs, e.coincident_weight};
}

std::string to_string(DimensionMethod m) {
  return m == DimensionMethod::Box ? "box" : "correlation";
}

std::vector<double> geometric_grid(double r_min, double r_max, std::size_t count) {
  if (!(r_min > 0) || !(r_max > r_min) || count < 2) {
    throw ArgumentError("geometric_grid: need 0 < r_min < r_max and count >= 2");
  }
  std::vector<double> g(count);
  const double step = std::log(r_max / r_min) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) g[k] = r_min * std::exp(step * static_cast<double>(k));
  g.back() = r_max;
  return g;
}

std::vector<double> default_radius_grid(const EmpiricalMeasure& measure, std::size_t count,
                                        double decades) {
  const double diam = measure.diameter_bound();
  if (!(diam > 0)) throw EstimationError("radius grid: support has zero diameter");
  return geometric_grid(diam * std::pow(10.0, -decades), diam, count);
}

DimensionEstimate correlation_dimension(const EmpiricalMeasure& measure, const MetricTag& metric,
                                        std::span<const double> r_grid,
                                        const CorrelationOptions& options) {
  check_metric(measure.dim(), metric);
  if (measure.size() < 2) throw EstimationError("correlation dimension: fewer than two points");
  const std::vector<double> radii = sorted_grid(r_grid);
  if (radii.empty()) throw ArgumentError("correlation dimension: empty radius grid");
  const EmpiricalMeasure work = working_copy(measure, options.pairs);

  PairCorrelation pc;
  if (options.center_window) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (in_ball(metric, work.point(i), *options.center_window)) rows.push_back(i);
    }
    if (rows.empty()) throw EstimationError("correlation dimension: no points in the center window");
    pc = pair_correlation_rows(work, metric, rows, radii, options.pairs.threads);
  } else {
    pc = pair_correlation(work, metric, radii, options.pairs.threads);
  }
  if (!(pc.total_weight > 0)) throw EstimationError("correlation dimension: no pair weight");

  std::vector<double> logc(radii.size());
  std::vector<bool> usable(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double c = pc.pair_weights[k] / pc.total_weight;
    logc[k] = c > 0 ? std::log(c) : std::numeric_limits<double>::quiet_NaN();
    usable[k] = c > 0 && pc.pair_counts[k] >= options.min_pairs && c <= options.max_fraction &&
                radii[k] >= options.r_floor;
  }
  return fit_estimate(DimensionMethod::Correlation, radii, logc, usable, 1.0, work.size());
}

namespace {

CellScan scan_boxes(std::span<const double> points, const MetricTag& metric, double r,
                    const std::optional<Ball>& window, KoranyiCover cover) {
  if (!(r > 0)) throw ArgumentError("box counting: r must be positive");
  if (points.size() % metric.point_dim() != 0) throw ArgumentError("box counting: ragged point list");
  if (!metric.is_koranyi()) return scan_cells(points, metric.point_dim(), r, {}, window, metric);
  if (cover == KoranyiCover::GreedyNet) return scan_koranyi_net(points, metric, r, window);
  return scan_koranyi_tiles(points, metric, r, window);
}

}  // namespace

std::size_t box_count(std::span<const double> points, const MetricTag& metric, double r,
                      const std::optional<Ball>& window, KoranyiCover cover) {
  return scan_boxes(points, metric, r, window, cover).boxes;
}

DimensionEstimate box_dimension(std::span<const double> points, const MetricTag& metric,
                                std::span<const double> r_grid, const BoxOptions& options) {
  const std::size_t dim = metric.point_dim();
  if (points.size() % dim != 0) throw ArgumentError("box_dimension: ragged point list");
  const std::size_t n = points.size() / dim;
  if (n < 2) throw EstimationError("box dimension: fewer than two points");
  const std::vector<double> radii = sorted_grid(r_grid);
  std::vector<double> logn(radii.size());
  std::vector<bool> usable(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const CellScan scan = scan_boxes(points, metric, radii[k], options.window, options.koranyi_cover);
    logn[k] = scan.boxes > 0 ? std::log(static_cast<double>(scan.boxes))
                             : std::numeric_limits<double>::quiet_NaN();
    usable[k] = scan.boxes >= options.min_boxes &&
                static_cast<double>(scan.covered_points) >=
                    options.min_points_per_box * static_cast<double>(scan.boxes);
  }
  return fit_estimate(DimensionMethod::Box, radii, logn, usable, -1.0, n);
}

DimensionEstimate box_dimension(const EmpiricalMeasure& measure, std::span<const double> r_grid,
                                const BoxOptions& options) {
  return box_dimension(measure.points(), measure.metric(), r_grid, options);
}

ProxyReport positive_measure_proxy(const EmpiricalMeasure& measure, int m,
                                   const ProxyOptions& options) {
  if (m < 1) throw ArgumentError("positive_measure_proxy: m must be >= 1");
  const MetricTag metric = MetricTag::euclidean(static_cast<std::size_t>(m));
  check_metric(measure.dim(), metric);
  ProxyReport rep;
  if (measure.size() < options.min_points) {
    rep.reason = "too few points (" + std::to_string(measure.size()) + ")";
    return rep;
  }
  const double diam = measure.diameter_bound();
  if (!(diam > 0)) {
    rep.reason = "support is a single point";
    return rep;
  }
  try {
    rep.correlation = correlation_dimension(measure, metric, default_radius_grid(measure, 40, 6.0),
                                            options.correlation);
  } catch (const EstimationError& e) {
    rep.reason = std::string("correlation dimension unavailable: ") + e.what();
    return rep;
  }

  // Densest dyadic cell across scales L 2^-k. The scale k = 1 is left out:
  // cells that large straddle the support edge.
  double extent = 0;
  for (int k = 0; k < m; ++k) {
    double lo = measure.point(0)[k], hi = lo;
    for (std::size_t i = 1; i < measure.size(); ++i) {
      lo = std::min(lo, measure.point(i)[k]);
      hi = std::max(hi, measure.point(i)[k]);
    }
    extent = std::max(extent, hi - lo);
  }
  std::vector<double> lx, ly;
  for (int k = 2; k <= 40; ++k) {
    const double side = extent * std::ldexp(1.0, -k);
    const CellScan scan = scan_cells(measure.points(), measure.dim(), side, measure.weights(),
                                     std::nullopt, metric);
    if (static_cast<double>(measure.size()) <
        options.min_cell_points * static_cast<double>(scan.boxes)) {
      break;
    }
    rep.cell_scales.push_back(side);
    rep.max_cell_mass.push_back(scan.max_mass / measure.total_mass());
    lx.push_back(std::log(side));
    ly.push_back(std::log(scan.max_mass / measure.total_mass()));
  }
  if (lx.size() < 3) {
    rep.reason = "fewer than three resolved cell scales";
    return rep;
  }
  rep.cell_exponent = fit_line(lx, ly).slope;
  const bool dim_ok = rep.correlation->value >= m - options.dimension_tolerance;
  const bool cell_ok = rep.cell_exponent >= options.cell_exponent_fraction * m;
  rep.positive = dim_ok && cell_ok;
  if (!dim_ok) {
    rep.reason = "correlation dimension below m";
  } else if (!cell_ok) {
    rep.reason = "mass concentrates in small cells";
  } else {
    rep.reason = "ok";
  }
  return rep;
}

}  // namespace isoproj
