#include "isoproj/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "isoproj/dimension.hpp"
#include "isoproj/errors.hpp"
#include "isoproj/heisenberg.hpp"
#include "isoproj/parallel.hpp"
#include "isoproj/stats.hpp"

namespace isoproj {

using nlohmann::json;

namespace {

// Stream purposes. Set clouds use kSets with index 0 (A) and 1 (B).
constexpr std::uint64_t kSets = 0x5e75;
constexpr std::uint64_t kProjectTrials = 0x70726f6a;
constexpr std::uint64_t kIntersectTrials = 0x696e7473;
constexpr std::uint64_t kSliceTrials = 0x736c6963;
constexpr std::uint64_t kDisintegrate = 0x64697369;
constexpr std::uint64_t kHeisSlice = 0x68736c63;
constexpr std::uint64_t kHeisIntersect = 0x68696e74;
constexpr std::uint64_t kHeisDrop = 0x6864726f;

const char* kThresholdNote =
    "Pass fractions and tolerance bands are desk-scale choices fixed by pilot runs; the "
    "almost-everywhere statements only assert positive measure sets of subspaces and give no "
    "effect sizes.";

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const char* verdict(bool ok) { return ok ? "pass" : "fail"; }

struct EuclideanSet {
  EmpiricalMeasure cloud;
  double dimension;
};

SimilarityIFS selected_ifs(const SetSelection& s) {
  const SimilarityIFS base = catalogue_ifs(s.name);
  if (s.ambient == 0 || s.ambient == base.dim()) return base;
  return product_embed(base, s.ambient, s.rotation_seed);
}

EuclideanSet euclidean_set(const SetSelection& s, std::size_t points, std::uint64_t seed,
                           std::uint64_t index) {
  const SimilarityIFS ifs = selected_ifs(s);
  RngStream rng(seed, derive_stream(kSets, index));
  EmpiricalMeasure cloud = chaos_game(ifs, points, rng);
  if (!s.offset.empty()) {
    cloud = pushforward(
        cloud,
        [&](std::span<const double> in, std::span<double> out) {
          for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] + s.offset[k];
        },
        cloud.metric());
  }
  return {std::move(cloud), similarity_dimension(ifs)};
}

EmpiricalMeasure heisenberg_cloud(const SetSelection& s, int n, std::size_t points,
                                  RngStream& rng) {
  EmpiricalMeasure cloud = s.name == "gauge_ball"
                               ? gauge_ball_sample(n, points, rng)
                               : heisenberg_chaos_game(heisenberg_catalogue(s.name), points, rng);
  if (!s.offset.empty()) {
    const HeisenbergPoint q = HeisenbergPoint::from_coords(s.offset);
    cloud = pushforward(
        cloud,
        [&](std::span<const double> in, std::span<double> out) {
          const Point c = mul(q, HeisenbergPoint::from_coords(in)).coords();
          std::copy(c.begin(), c.end(), out.begin());
        },
        cloud.metric());
  }
  return cloud;
}

double heisenberg_set_dimension(const SetSelection& s, int n) {
  if (s.name == "gauge_ball") return 2.0 * n + 2.0;
  return similarity_dimension(heisenberg_catalogue(s.name));
}

// V-coordinates of the first `frame.dim()` coordinates of every point.
EmpiricalMeasure chart_image(const EmpiricalMeasure& cloud, const Frame& frame) {
  const std::size_t zd = frame.dim();
  return pushforward(
      cloud,
      [&](std::span<const double> in, std::span<double> out) {
        frame.coordinates_into(in.first(zd), out);
      },
      MetricTag::euclidean(frame.rank()));
}

CorrelationOptions correlation_options(const ExperimentConfig& c) {
  CorrelationOptions o;
  o.pairs.threads = 1;
  o.pairs.max_points = c.estimator.max_points;
  o.min_pairs = c.estimator.min_pairs;
  o.max_fraction = c.estimator.max_fraction;
  return o;
}

ProxyOptions proxy_options(const ExperimentConfig& c) {
  ProxyOptions o;
  o.dimension_tolerance = c.thresholds.proxy_dimension_tolerance;
  o.cell_exponent_fraction = c.thresholds.proxy_cell_exponent_fraction;
  o.min_cell_points = c.thresholds.proxy_min_cell_points;
  o.correlation = correlation_options(c);
  return o;
}

std::vector<double> radius_grid(const EmpiricalMeasure& m, const ExperimentConfig& c) {
  return default_radius_grid(m, c.estimator.grid_count, c.estimator.grid_decades);
}

void record_estimate(TrialRecord& rec, const std::string& prefix, const DimensionEstimate& e) {
  rec.estimates[prefix + "dimension"] = e.value;
  rec.estimates[prefix + "standard_error"] = e.standard_error;
  rec.estimates[prefix + "r_min"] = e.r_min;
  rec.estimates[prefix + "r_max"] = e.r_max;
  rec.estimates[prefix + "scales_used"] = static_cast<double>(e.scales_used);
}

void record_proxy(TrialRecord& rec, const std::string& prefix, const ProxyReport& p) {
  rec.estimates[prefix + "proxy_positive"] = p.positive ? 1.0 : 0.0;
  rec.estimates[prefix + "correlation_dimension"] =
      p.correlation ? p.correlation->value : std::numeric_limits<double>::quiet_NaN();
  rec.estimates[prefix + "cell_exponent"] = p.cell_exponent;
  rec.flags.push_back(prefix + "proxy:" + p.reason);
}

bool has_flag(const TrialRecord& r, const std::string& f) {
  return std::find(r.flags.begin(), r.flags.end(), f) != r.flags.end();
}

// Summary over the trials that carry `key`; pass fraction over `pool`.
ReportSummary summarize(const std::vector<TrialRecord>& trials, const std::string& key,
                        const std::function<bool(const TrialRecord&)>& in_pool) {
  ReportSummary s;
  s.statistic = key;
  std::vector<double> values;
  std::size_t pool = 0, passed = 0;
  for (const TrialRecord& t : trials) {
    if (!in_pool(t)) continue;
    ++pool;
    passed += has_flag(t, "pass");
    const auto it = t.estimates.find(key);
    if (it != t.estimates.end() && std::isfinite(it->second)) values.push_back(it->second);
  }
  s.count = values.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.median = values.empty() ? nan : quantile(values, 0.5);
  s.q1 = values.empty() ? nan : quantile(values, 0.25);
  s.q3 = values.empty() ? nan : quantile(values, 0.75);
  s.pass_fraction = pool == 0 ? nan : static_cast<double>(passed) / static_cast<double>(pool);
  return s;
}

bool all_trials(const TrialRecord&) { return true; }

// Cell keys of side h for m-dimensional points, sorted with their indices.
struct CellIndex {
  std::size_t m = 1;
  std::vector<std::int64_t> keys;  // row-major, m per entry
  std::vector<std::size_t> order;  // entry -> point index

  CellIndex(std::span<const double> pts, std::size_t dim, double h) : m(dim) {
    const std::size_t n = pts.size() / m;
    std::vector<std::int64_t> raw(n * m);
    for (std::size_t i = 0; i < n * m; ++i) raw[i] = static_cast<std::int64_t>(std::floor(pts[i] / h));
    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(raw.begin() + a * m, raw.begin() + (a + 1) * m,
                                          raw.begin() + b * m, raw.begin() + (b + 1) * m);
    });
    keys.resize(n * m);
    for (std::size_t e = 0; e < n; ++e)
      std::copy(raw.begin() + order[e] * m, raw.begin() + (order[e] + 1) * m, keys.begin() + e * m);
  }

  // Entries [first, last) whose key equals `key`.
  std::pair<std::size_t, std::size_t> find(std::span<const std::int64_t> key) const {
    auto less_entry = [&](std::size_t e, std::span<const std::int64_t> k) {
      return std::lexicographical_compare(keys.begin() + e * m, keys.begin() + (e + 1) * m,
                                          k.begin(), k.end());
    };
    std::size_t lo = 0, hi = order.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (less_entry(mid, key)) lo = mid + 1; else hi = mid;
    }
    std::size_t end = lo;
    while (end < order.size() &&
           std::equal(keys.begin() + end * m, keys.begin() + (end + 1) * m, key.begin())) {
      ++end;
    }
    return {lo, end};
  }
};

// Calls fn(offset) for every offset in {-1, 0, 1}^m.
template <class Fn>
void for_each_neighbor(std::size_t m, Fn&& fn) {
  std::vector<std::int64_t> off(m, -1);
  for (;;) {
    fn(std::span<const std::int64_t>(off));
    std::size_t k = 0;
    while (k < m && off[k] == 1) off[k++] = -1;
    if (k == m) return;
    ++off[k];
  }
}

// mask[i] = point i of `a` lies within eps of some point of `b`.
std::vector<char> near_mask(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double eps) {
  const std::size_t m = a.dim();
  const CellIndex index(b.points(), m, eps);
  std::vector<char> mask(a.size(), 0);
  std::vector<std::int64_t> base(m), probe(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto p = a.point(i);
    for (std::size_t k = 0; k < m; ++k) base[k] = static_cast<std::int64_t>(std::floor(p[k] / eps));
    bool hit = false;
    for_each_neighbor(m, [&](std::span<const std::int64_t> off) {
      if (hit) return;
      for (std::size_t k = 0; k < m; ++k) probe[k] = base[k] + off[k];
      const auto [lo, hi] = index.find(probe);
      for (std::size_t e = lo; e < hi && !hit; ++e) {
        const auto q = b.point(index.order[e]);
        double d2 = 0;
        for (std::size_t k = 0; k < m; ++k) d2 += (p[k] - q[k]) * (p[k] - q[k]);
        hit = d2 <= eps * eps;
      }
    });
    mask[i] = hit;
  }
  return mask;
}

// Some occupied eps-cell has all 3^m neighbor cells occupied, so the ball
// of radius eps about its center is covered at resolution eps.
bool covers_a_ball(const EmpiricalMeasure& region, double eps) {
  if (region.empty()) return false;
  const std::size_t m = region.dim();
  const CellIndex index(region.points(), m, eps);
  std::vector<std::int64_t> probe(m);
  for (std::size_t e = 0; e < index.order.size(); ++e) {
    if (e > 0 && std::equal(index.keys.begin() + e * m, index.keys.begin() + (e + 1) * m,
                            index.keys.begin() + (e - 1) * m)) {
      continue;
    }
    bool full = true;
    for_each_neighbor(m, [&](std::span<const std::int64_t> off) {
      if (!full) return;
      for (std::size_t k = 0; k < m; ++k) probe[k] = index.keys[e * m + k] + off[k];
      const auto [lo, hi] = index.find(probe);
      full = lo < hi;
    });
    if (full) return true;
  }
  return false;
}

// Bounding-box center and half diagonal.
std::pair<Point, double> bounding_ball(const EmpiricalMeasure& mu) {
  const std::size_t d = mu.dim();
  Point lo(mu.point(0).begin(), mu.point(0).end()), hi = lo;
  for (std::size_t i = 1; i < mu.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], mu.point(i)[k]);
      hi[k] = std::max(hi[k], mu.point(i)[k]);
    }
  }
  Point c(d);
  double r2 = 0;
  for (std::size_t k = 0; k < d; ++k) {
    c[k] = 0.5 * (lo[k] + hi[k]);
    r2 += 0.25 * (hi[k] - lo[k]) * (hi[k] - lo[k]);
  }
  return {c, std::sqrt(r2)};
}

// Overlap of two chart images: points of a within eps of b, then the proxies.
void overlap_trial(TrialRecord& rec, const EmpiricalMeasure& pa, const EmpiricalMeasure& pb,
                   const ExperimentConfig& c) {
  const double eps = c.thresholds.overlap_epsilon;
  const std::vector<char> mask = near_mask(pa, pb, eps);
  const EmpiricalMeasure overlap = pa.restrict([&](std::size_t i) { return mask[i] != 0; });
  rec.estimates["overlap_points"] = static_cast<double>(overlap.size());
  rec.estimates["overlap_mass"] = overlap.total_mass();
  const ProxyReport proxy = positive_measure_proxy(overlap, c.m, proxy_options(c));
  record_proxy(rec, "", proxy);
  rec.estimates["interior"] = covers_a_ball(overlap, eps) ? 1.0 : 0.0;
  rec.flags.push_back(proxy.positive ? "pass" : "fail");
}

// Intercept of the estimates against delta (the delta -> 0 limit).
void extrapolate(TrialRecord& rec, const std::vector<double>& deltas, const std::vector<double>& dims) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (dims.empty()) {
    rec.estimates["slice_dimension"] = nan;
    rec.flags.push_back("skipped");
    return;
  }
  if (dims.size() == 1) {
    rec.estimates["slice_dimension"] = dims[0];
    rec.flags.push_back("single_delta");
    return;
  }
  const LineFit fit = fit_line(deltas, dims);
  rec.estimates["slice_dimension"] = fit.intercept;
  rec.estimates["delta_slope"] = fit.slope;
}

std::string delta_key(std::size_t k) { return "delta_" + std::to_string(k) + "."; }

ExperimentReport start_report(const ExperimentConfig& c) {
  if (!c.seed) throw ConfigError("config: seed is required");
  ExperimentReport r;
  r.config = to_json(c);
  r.details["notes"] = json::array({kThresholdNote});
  return r;
}

}  // namespace

double sliced_mass_integral(const EmpiricalMeasure& chart_image, double delta, double h) {
  if (!(delta > 0) || !(h > 0)) throw ArgumentError("sliced_mass_integral: delta and h must be positive");
  const std::size_t m = chart_image.dim();
  const double md = static_cast<double>(m);
  const double ball = std::pow(std::numbers::pi, md / 2) / std::tgamma(md / 2 + 1) * std::pow(delta, md);
  NeumaierSum total;
  std::vector<std::int64_t> lo(m), hi(m), k(m);
  for (std::size_t i = 0; i < chart_image.size(); ++i) {
    const auto p = chart_image.point(i);
    for (std::size_t a = 0; a < m; ++a) {
      lo[a] = static_cast<std::int64_t>(std::ceil((p[a] - delta) / h));
      hi[a] = static_cast<std::int64_t>(std::floor((p[a] + delta) / h));
      if (lo[a] > hi[a]) goto next_point;
      k[a] = lo[a];
    }
    {
      std::size_t count = 0;
      for (;;) {
        double d2 = 0;
        for (std::size_t a = 0; a < m; ++a) d2 += (p[a] - h * k[a]) * (p[a] - h * k[a]);
        count += d2 <= delta * delta;
        std::size_t a = 0;
        while (a < m && k[a] == hi[a]) k[a] = lo[a], ++a;
        if (a == m) break;
        ++k[a];
      }
      total.add(chart_image.weight(i) * static_cast<double>(count));
    }
  next_point:;
  }
  return total.value() * std::pow(h, md) / ball;
}

double polar_quadrature_ratio(TestFunction f) {
  auto simpson = [](auto&& g, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = g(a) + g(b);
    for (int i = 1; i < panels; ++i) s += g(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  const double rmax = 12.0;
  auto at = [&](double r, double th) {
    const double p[2] = {r * std::cos(th), r * std::sin(th)};
    return evaluate_test_function(f, p);
  };
  const double pi = std::numbers::pi;
  // Left side in polar coordinates; right side averages over lines at angle
  // th in [0, pi), each carrying |a| f(a q) da over both half lines.
  const double lhs = simpson(
      [&](double th) { return simpson([&](double r) { return r * at(r, th); }, 0, rmax, 2000); },
      0, 2 * pi, 400);
  const double rhs =
      simpson(
          [&](double th) {
            return simpson([&](double r) { return r * (at(r, th) + at(r, th + pi)); }, 0, rmax, 2000);
          },
          0, pi, 400) /
      pi;
  return lhs / rhs;
}

ExperimentReport run_projection_experiment(const ExperimentConfig& c, const RunOptions& options) {
  validate(c);
  if (c.experiment != "project") throw ConfigError("run_projection_experiment: wrong experiment");
  const Timer timer;
  ExperimentReport rep = start_report(c);
  const EuclideanSet a = euclidean_set(c.set_a, c.points, *c.seed, 0);
  const bool dimension_branch = a.dimension <= c.m;
  const double tol = c.thresholds.projection_dimension_tolerance;

  rep.trials.resize(c.subspace_trials);
  parallel_for(c.subspace_trials, options.threads, [&](std::size_t t) {
    TrialRecord& rec = rep.trials[t];
    rec.trial_id = t;
    rec.stream_id = derive_stream(kProjectTrials, t);
    RngStream rng(*c.seed, rec.stream_id);
    const IsotropicSubspace v = sample_isotropic_subspace(c.n, c.m, rng);
    rec.subspace_frame = v.frame().rows();
    const EmpiricalMeasure img = chart_image(a.cloud, v.frame());
    try {
      if (dimension_branch) {
        const DimensionEstimate e =
            correlation_dimension(img, img.metric(), radius_grid(img, c), correlation_options(c));
        record_estimate(rec, "", e);
        rec.flags.push_back(std::abs(e.value - a.dimension) <= tol ? "pass" : "fail");
      } else {
        const ProxyReport p = positive_measure_proxy(img, c.m, proxy_options(c));
        record_proxy(rec, "", p);
        rec.flags.push_back(p.positive ? "pass" : "fail");
      }
    } catch (const EstimationError& e) {
      rec.flags.push_back(std::string("estimator_error:") + e.what());
      rec.flags.push_back("fail");
    }
  });

  rep.details["set_dimension"] = a.dimension;
  rep.details["branch"] = dimension_branch ? "dimension" : "proxy";
  if (dimension_branch) {
    rep.summary = summarize(rep.trials, "dimension", all_trials);
    const bool ok = rep.summary.count > 0 && std::abs(rep.summary.median - a.dimension) <= tol;
    rep.verdicts["projection.median_dimension"] = verdict(ok);
    rep.details["target"] = a.dimension;
  } else {
    rep.summary = summarize(rep.trials, "correlation_dimension", all_trials);
    rep.verdicts["projection.proxy_fraction"] =
        verdict(rep.summary.pass_fraction >= c.thresholds.projection_proxy_fraction);
  }
  rep.runtime_seconds = timer.seconds();
  return rep;
}

ExperimentReport run_intersection_experiment(const ExperimentConfig& c, const RunOptions& options) {
  validate(c);
  if (c.experiment != "intersect") throw ConfigError("run_intersection_experiment: wrong experiment");
  const Timer timer;
  ExperimentReport rep = start_report(c);
  const EuclideanSet a = euclidean_set(c.set_a, c.points, *c.seed, 0);
  const bool same = c.control == "same";
  const EuclideanSet b = same ? a : euclidean_set(*c.set_b, c.points, *c.seed, 1);
  const auto [ca, ra] = bounding_ball(a.cloud);
  const auto [cb, rb] = bounding_ball(b.cloud);
  Point gap(ca.size());
  for (std::size_t k = 0; k < gap.size(); ++k) gap[k] = cb[k] - ca[k];

  rep.trials.resize(c.subspace_trials);
  parallel_for(c.subspace_trials, options.threads, [&](std::size_t t) {
    TrialRecord& rec = rep.trials[t];
    rec.trial_id = t;
    rec.stream_id = derive_stream(kIntersectTrials, t);
    RngStream rng(*c.seed, rec.stream_id);
    const IsotropicSubspace v = sample_isotropic_subspace(c.n, c.m, rng);
    rec.subspace_frame = v.frame().rows();
    // Projected bounding balls are disjoint: so are the projections.
    const bool separated = norm(v.coordinates(gap)) > ra + rb + c.thresholds.overlap_epsilon;
    rec.estimates["separated"] = separated ? 1.0 : 0.0;
    if (separated) rec.flags.push_back("separated");
    overlap_trial(rec, chart_image(a.cloud, v.frame()), chart_image(b.cloud, v.frame()), c);
  });

  rep.summary = summarize(rep.trials, "overlap_mass", all_trials);
  rep.details["set_a_dimension"] = a.dimension;
  rep.details["set_b_dimension"] = b.dimension;
  std::size_t interior = 0, family = 0, family_positive = 0;
  for (const TrialRecord& t : rep.trials) {
    interior += t.estimates.at("interior") > 0;
    if (has_flag(t, "separated")) {
      ++family;
      family_positive += has_flag(t, "pass");
    }
  }
  rep.details["interior_fraction"] = static_cast<double>(interior) / static_cast<double>(rep.trials.size());
  rep.details["separated_trials"] = family;
  if (c.control == "independent") {
    rep.verdicts["intersection.positive_fraction"] =
        verdict(rep.summary.pass_fraction > c.thresholds.intersection_positive_fraction);
  } else if (same) {
    rep.verdicts["intersection.same_control"] = verdict(rep.summary.pass_fraction == 1.0);
  } else {
    rep.verdicts["intersection.disjoint_control"] = verdict(family > 0 && family_positive == 0);
  }
  // Nonempty interior needs dimension > 2m; it is recorded, not asserted.
  rep.verdicts["intersection.interior"] = "reported";
  rep.runtime_seconds = timer.seconds();
  return rep;
}

ExperimentReport run_slicing_experiment(const ExperimentConfig& c, const RunOptions& options) {
  validate(c);
  if (c.experiment != "slice") throw ConfigError("run_slicing_experiment: wrong experiment");
  const Timer timer;
  ExperimentReport rep = start_report(c);
  const EuclideanSet a = euclidean_set(c.set_a, c.points, *c.seed, 0);
  const double target = a.dimension - c.m;
  const double tol = c.thresholds.slice_dimension_tolerance;
  const double mass_delta = *std::min_element(c.deltas.begin(), c.deltas.end());
  const MetricTag ambient = a.cloud.metric();

  const std::size_t count = c.subspace_trials * c.slice_anchors;
  rep.trials.resize(count);
  parallel_for(count, options.threads, [&](std::size_t t) {
    TrialRecord& rec = rep.trials[t];
    rec.trial_id = t;
    rec.stream_id = derive_stream(kSliceTrials, t);
    RngStream rng(*c.seed, rec.stream_id);
    const IsotropicSubspace v = sample_isotropic_subspace(c.n, c.m, rng);
    rec.subspace_frame = v.frame().rows();
    const EmpiricalMeasure img = chart_image(a.cloud, v.frame());
    const std::size_t anchor = static_cast<std::size_t>(rng.below(a.cloud.size()));
    const auto x = img.point(anchor);
    rec.estimates["anchor_index"] = static_cast<double>(anchor);

    std::vector<double> used, dims;
    for (std::size_t k = 0; k < c.deltas.size(); ++k) {
      const double delta = c.deltas[k];
      const EmpiricalMeasure slab = a.cloud.restrict(
          [&](std::size_t i) {
            double d2 = 0;
            for (std::size_t j = 0; j < x.size(); ++j) d2 += (img.point(i)[j] - x[j]) * (img.point(i)[j] - x[j]);
            return d2 <= delta * delta;
          },
          std::pow(2 * delta, -static_cast<double>(c.m)));
      rec.estimates[delta_key(k) + "points"] = static_cast<double>(slab.size());
      if (slab.size() < c.thresholds.min_slab_points) {
        rec.flags.push_back("thin_slab:delta_" + std::to_string(k));
        continue;
      }
      CorrelationOptions opt = correlation_options(c);
      // Below a few delta the slab looks like the thickened slice. A slab that
      // holds the whole cloud is the set itself and has no such floor.
      if (slab.size() < a.cloud.size()) {
        opt.r_floor = c.thresholds.slab_floor_factor * delta;
      } else {
        rec.flags.push_back("whole_set:delta_" + std::to_string(k));
      }
      try {
        const DimensionEstimate e = correlation_dimension(slab, ambient, radius_grid(slab, c), opt);
        record_estimate(rec, delta_key(k), e);
        used.push_back(delta);
        dims.push_back(e.value);
      } catch (const EstimationError& e) {
        rec.flags.push_back("estimator_error:" + delta_key(k) + e.what());
      }
    }
    extrapolate(rec, used, dims);
    const double sd = rec.estimates["slice_dimension"];
    if (std::isfinite(sd)) rec.flags.push_back(std::abs(sd - target) <= tol ? "pass" : "fail");

    const double integral = sliced_mass_integral(img, mass_delta, c.thresholds.mass_grid_step * mass_delta);
    rec.estimates["sliced_mass_integral"] = integral;
    rec.estimates["mass_relative_error"] = std::abs(integral / a.cloud.total_mass() - 1);
  });

  rep.summary = summarize(rep.trials, "slice_dimension",
                          [](const TrialRecord& t) { return !has_flag(t, "skipped"); });
  double worst_mass = 0;
  std::size_t skipped = 0;
  for (const TrialRecord& t : rep.trials) {
    worst_mass = std::max(worst_mass, t.estimates.at("mass_relative_error"));
    skipped += has_flag(t, "skipped");
  }
  rep.details["set_dimension"] = a.dimension;
  rep.details["target"] = target;
  rep.details["skipped_trials"] = skipped;
  rep.details["mass_delta"] = mass_delta;
  rep.details["worst_mass_relative_error"] = worst_mass;
  rep.verdicts["slicing.median_dimension"] =
      verdict(rep.summary.count > 0 && std::abs(rep.summary.median - target) <= tol);
  rep.verdicts["slicing.mass_identity"] = verdict(worst_mass <= c.thresholds.mass_tolerance);
  rep.runtime_seconds = timer.seconds();
  return rep;
}

ExperimentReport run_disintegration_experiment(const ExperimentConfig& c, const RunOptions& options) {
  validate(c);
  if (c.experiment != "disintegrate") throw ConfigError("run_disintegration_experiment: wrong experiment");
  const Timer timer;
  ExperimentReport rep = start_report(c);
  const bool polar = c.n == 1 && c.m == 1;
  for (std::size_t k = 0; k < c.test_functions.size(); ++k) {
    const TestFunction f = test_function_from_string(c.test_functions[k]);
    TrialRecord rec;
    rec.trial_id = k;
    rec.stream_id = derive_stream(kDisintegrate, k);
    RngStream rng(*c.seed, rec.stream_id);
    const DisintegrationResult d = disintegration_check(f, c.n, c.m, c.samples, rng, options.threads);
    rec.flags.push_back("function:" + c.test_functions[k]);
    rec.estimates["lhs"] = d.lhs.value;
    rec.estimates["lhs_standard_error"] = d.lhs.standard_error;
    rec.estimates["rhs"] = d.rhs.value;
    rec.estimates["rhs_standard_error"] = d.rhs.standard_error;
    if (f == TestFunction::Zero) {
      rec.flags.push_back("zero_function");
      rec.flags.push_back(d.lhs.value == 0 && d.rhs.value == 0 ? "pass" : "fail");
    } else {
      rec.estimates["ratio"] = d.ratio;
      rec.estimates["ratio_standard_error"] = d.ratio_stderr;
      if (polar) rec.estimates["polar_oracle"] = polar_quadrature_ratio(f);
    }
    rep.trials.push_back(std::move(rec));
  }

  // Every pair of ratios must agree within the combined standard error.
  const double sig = c.thresholds.disintegration_sigmas;
  double worst_z = 0, worst_oracle = 0;
  bool spread_ok = true, oracle_ok = true;
  for (TrialRecord& t : rep.trials) {
    if (has_flag(t, "zero_function")) continue;
    bool consistent = true;
    for (const TrialRecord& u : rep.trials) {
      if (&u == &t || has_flag(u, "zero_function")) continue;
      const double se = std::hypot(t.estimates.at("ratio_standard_error"), u.estimates.at("ratio_standard_error"));
      const double z = std::abs(t.estimates.at("ratio") - u.estimates.at("ratio")) / se;
      worst_z = std::max(worst_z, z);
      consistent = consistent && z <= sig;
    }
    if (polar) {
      const double rel = std::abs(t.estimates.at("ratio") / t.estimates.at("polar_oracle") - 1);
      worst_oracle = std::max(worst_oracle, rel);
      consistent = consistent && rel <= c.thresholds.polar_oracle_tolerance;
      oracle_ok = oracle_ok && rel <= c.thresholds.polar_oracle_tolerance;
    }
    spread_ok = spread_ok && worst_z <= sig;
    t.flags.push_back(consistent ? "pass" : "fail");
  }
  rep.summary = summarize(rep.trials, "ratio", [](const TrialRecord& t) { return !has_flag(t, "zero_function"); });
  // |S^{2n-1}| / |S^{m-1}|, for reference.
  auto sphere = [](int k) { return 2 * std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0); };
  rep.details["sphere_area_ratio"] = sphere(2 * c.n) / sphere(c.m);
  rep.details["worst_pair_z"] = worst_z;
  rep.verdicts["disintegration.ratio_spread"] = verdict(spread_ok);
  if (polar) {
    rep.details["worst_oracle_relative_error"] = worst_oracle;
    rep.verdicts["disintegration.polar_oracle"] = verdict(oracle_ok);
  }
  for (const TrialRecord& t : rep.trials) {
    if (has_flag(t, "zero_function")) rep.verdicts["disintegration.zero_function"] = verdict(has_flag(t, "pass"));
  }
  rep.runtime_seconds = timer.seconds();
  return rep;
}

namespace {

// Largest residual of the splitting identity p = P_Vperp(p) * P_V(p) and of
// the idempotence of both projections over every point of the cloud.
double splitting_residual(const EmpiricalMeasure& cloud, const HorizontalSubgroup& v) {
  double worst = 0;
  auto gap = [](const HeisenbergPoint& a, const HeisenbergPoint& b) {
    double g = std::abs(a.t - b.t);
    for (std::size_t i = 0; i < a.z.size(); ++i) g = std::max(g, std::abs(a.z[i] - b.z[i]));
    return g;
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const HeisenbergPoint p = HeisenbergPoint::from_coords(cloud.point(i));
    const HeisenbergPoint h = horizontal_projection(v, p);
    const HeisenbergPoint w = vertical_projection(v, p);
    worst = std::max(worst, gap(mul(w, h), p));
    worst = std::max(worst, gap(horizontal_projection(v, h), h));
    worst = std::max(worst, gap(vertical_projection(v, w), w));
  }
  return worst;
}

}  // namespace

ExperimentReport run_heisenberg_experiment(const ExperimentConfig& c, const RunOptions& options) {
  validate(c);
  if (c.experiment != "heisenberg") throw ConfigError("run_heisenberg_experiment: wrong experiment");
  const Timer timer;
  ExperimentReport rep = start_report(c);
  RngStream ra(*c.seed, derive_stream(kSets, 0)), rb(*c.seed, derive_stream(kSets, 1));
  const EmpiricalMeasure a = heisenberg_cloud(c.set_a, c.n, c.points, ra);
  const EmpiricalMeasure b = heisenberg_cloud(*c.set_b, c.n, c.points, rb);
  const double sa = heisenberg_set_dimension(c.set_a, c.n);
  const double sb = heisenberg_set_dimension(*c.set_b, c.n);
  const double target = sa - c.m;
  const bool slice_hypothesis = sa > c.m + 2;
  const double tol = c.thresholds.heisenberg_slice_tolerance;
  const double itol = c.thresholds.identity_tolerance;

  // Anchors are drawn from the points well inside the unit ball.
  std::vector<std::size_t> inner;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (koranyi_norm(HeisenbergPoint::from_coords(a.point(i))) <= c.anchor_radius) inner.push_back(i);
  }
  if (inner.empty()) throw ConfigError("heisenberg: no point of set_a within anchor_radius");

  const std::size_t slices = c.subspace_trials * c.slice_anchors;
  const std::size_t crossings = c.subspace_trials;
  const std::vector<std::string> drop_sets = heisenberg_catalogue_names();
  rep.trials.resize(slices + crossings + drop_sets.size());

  parallel_for(rep.trials.size(), options.threads, [&](std::size_t t) {
    TrialRecord& rec = rep.trials[t];
    rec.trial_id = t;
    if (t < slices) {
      rec.stream_id = derive_stream(kHeisSlice, t);
      rec.flags.push_back("slice");
      RngStream rng(*c.seed, rec.stream_id);
      const HorizontalSubgroup v(sample_isotropic_subspace(c.n, c.m, rng));
      rec.subspace_frame = v.base().frame().rows();
      const double residual = splitting_residual(a, v);
      rec.estimates["identity_residual"] = residual;
      if (residual > itol) {
        rec.flags.push_back("identity_check_failed");
        return;
      }
      const std::size_t idx = inner[static_cast<std::size_t>(rng.below(inner.size()))];
      const HeisenbergPoint p = HeisenbergPoint::from_coords(a.point(idx));
      rec.estimates["anchor_index"] = static_cast<double>(idx);
      std::vector<double> used, dims;
      for (std::size_t k = 0; k < c.deltas.size(); ++k) {
        const double delta = c.deltas[k];
        const EmpiricalMeasure slab = vertical_coset_slab(a, v, p, delta);
        rec.estimates[delta_key(k) + "points"] = static_cast<double>(slab.size());
        if (slab.size() < c.thresholds.min_slab_points) {
          rec.flags.push_back("thin_slab:delta_" + std::to_string(k));
          continue;
        }
        CorrelationOptions opt = correlation_options(c);
        opt.center_window = Ball{p.coords(), c.window_radius};
        const double floor = c.thresholds.slab_floor_factor * delta;
        try {
          if (!(floor < c.slice_r_max)) throw EstimationError("slab floor above slice_r_max");
          const DimensionEstimate e = correlation_dimension(
              slab, slab.metric(), geometric_grid(floor, c.slice_r_max, c.estimator.grid_count), opt);
          record_estimate(rec, delta_key(k), e);
          used.push_back(delta);
          dims.push_back(e.value);
        } catch (const EstimationError& e) {
          rec.flags.push_back("estimator_error:" + delta_key(k) + e.what());
        }
      }
      extrapolate(rec, used, dims);
      const double sd = rec.estimates["slice_dimension"];
      if (std::isfinite(sd)) rec.flags.push_back(std::abs(sd - target) <= tol ? "pass" : "fail");
    } else if (t < slices + crossings) {
      const std::size_t j = t - slices;
      rec.stream_id = derive_stream(kHeisIntersect, j);
      rec.flags.push_back("intersection");
      RngStream rng(*c.seed, rec.stream_id);
      const HorizontalSubgroup v(sample_isotropic_subspace(c.n, c.m, rng));
      rec.subspace_frame = v.base().frame().rows();
      const double residual = std::max(splitting_residual(a, v), splitting_residual(b, v));
      rec.estimates["identity_residual"] = residual;
      if (residual > itol) {
        rec.flags.push_back("identity_check_failed");
        return;
      }
      // P_V of the horizontal projection is P_V applied to pi(p).
      overlap_trial(rec, chart_image(a, v.base().frame()), chart_image(b, v.base().frame()), c);
    } else {
      const std::size_t j = t - slices - crossings;
      rec.stream_id = derive_stream(kHeisDrop, j);
      rec.flags.push_back("dimension_drop:" + drop_sets[j]);
      RngStream rng(*c.seed, rec.stream_id);
      const HeisenbergIFS ifs = heisenberg_catalogue(drop_sets[j]);
      const EmpiricalMeasure cloud = heisenberg_chaos_game(ifs, c.points, rng);
      const EmpiricalMeasure flat = pushforward(
          cloud,
          [](std::span<const double> in, std::span<double> out) {
            std::copy(in.begin(), in.end() - 1, out.begin());
          },
          MetricTag::euclidean(cloud.dim() - 1));
      rec.estimates["similarity_dimension"] = similarity_dimension(ifs);
      try {
        const DimensionEstimate dk =
            correlation_dimension(cloud, cloud.metric(), radius_grid(cloud, c), correlation_options(c));
        const DimensionEstimate de =
            correlation_dimension(flat, flat.metric(), radius_grid(flat, c), correlation_options(c));
        rec.estimates["koranyi_dimension"] = dk.value;
        rec.estimates["koranyi_standard_error"] = dk.standard_error;
        rec.estimates["euclidean_pi_dimension"] = de.value;
        rec.estimates["euclidean_standard_error"] = de.standard_error;
        const double bound = dk.value - 2 - c.thresholds.dimension_drop_slack;
        rec.estimates["lower_bound"] = bound;
        rec.flags.push_back(de.value >= bound ? "pass" : "fail");
      } catch (const EstimationError& e) {
        rec.flags.push_back(std::string("estimator_error:") + e.what());
        rec.flags.push_back("fail");
      }
    }
  });

  auto is = [](const char* kind) {
    return [kind](const TrialRecord& t) { return has_flag(t, kind); };
  };
  rep.summary = summarize(rep.trials, "slice_dimension", is("slice"));
  double worst_residual = 0;
  bool identities_ok = true, drop_ok = true;
  std::size_t positive = 0;
  for (const TrialRecord& t : rep.trials) {
    if (t.estimates.count("identity_residual")) {
      worst_residual = std::max(worst_residual, t.estimates.at("identity_residual"));
    }
    identities_ok = identities_ok && !has_flag(t, "identity_check_failed");
    if (has_flag(t, "intersection")) positive += has_flag(t, "pass");
    if (t.flags[0].rfind("dimension_drop:", 0) == 0) drop_ok = drop_ok && has_flag(t, "pass");
  }
  rep.details["set_a_dimension"] = sa;
  rep.details["set_b_dimension"] = sb;
  rep.details["slice_target"] = target;
  rep.details["worst_identity_residual"] = worst_residual;
  rep.details["intersection_positive_fraction"] =
      static_cast<double>(positive) / static_cast<double>(crossings);
  rep.details["intersection_hypothesis_met"] = sa > c.m + 2 && sb > c.m + 2;
  rep.verdicts["heisenberg.identities"] = verdict(identities_ok);
  const bool slice_ok = rep.summary.count > 0 && std::abs(rep.summary.median - target) <= tol;
  rep.verdicts["heisenberg.slice_dimension"] = slice_hypothesis ? verdict(slice_ok) : "reported";
  rep.verdicts["heisenberg.dimension_drop"] = verdict(drop_ok);
  rep.verdicts["heisenberg.intersection"] = "reported";
  rep.runtime_seconds = timer.seconds();
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& c, const RunOptions& options) {
  if (c.experiment == "project") return run_projection_experiment(c, options);
  if (c.experiment == "intersect") return run_intersection_experiment(c, options);
  if (c.experiment == "slice") return run_slicing_experiment(c, options);
  if (c.experiment == "disintegrate") return run_disintegration_experiment(c, options);
  if (c.experiment == "heisenberg") return run_heisenberg_experiment(c, options);
  throw ConfigError("unknown experiment '" + c.experiment + "'");
}

}  // namespace isoproj
