#include "isoproj/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isoproj/errors.hpp"

namespace isoproj {

namespace {

void same_n(const HeisenbergPoint& p, const HeisenbergPoint& q) {
  if (p.z.size() != q.z.size() || p.z.empty() || p.z.size() % 2 != 0) {
    throw ArgumentError("Heisenberg points of different (or invalid) dimension");
  }
}

}  // namespace

Point HeisenbergPoint::coords() const {
  Point c(z);
  c.push_back(t);
  return c;
}

HeisenbergPoint HeisenbergPoint::from_coords(std::span<const double> c) {
  if (c.size() < 3 || c.size() % 2 == 0) throw ArgumentError("Heisenberg coordinates need 2n+1 values");
  return {Point(c.begin(), c.end() - 1), c.back()};
}

HeisenbergPoint mul(const HeisenbergPoint& p, const HeisenbergPoint& q) {
  same_n(p, q);
  HeisenbergPoint r;
  r.z.resize(p.z.size());
  for (std::size_t i = 0; i < p.z.size(); ++i) r.z[i] = p.z[i] + q.z[i];
  r.t = p.t + q.t - 0.5 * symplectic_form(p.z, q.z);
  return r;
}

HeisenbergPoint inverse(const HeisenbergPoint& p) {
  HeisenbergPoint r;
  r.z.resize(p.z.size());
  for (std::size_t i = 0; i < p.z.size(); ++i) r.z[i] = -p.z[i];
  r.t = -p.t;
  return r;
}

double koranyi_norm(const HeisenbergPoint& p) {
  double z2 = 0;
  for (double v : p.z) z2 += v * v;
  return std::sqrt(std::sqrt(z2 * z2 + 16.0 * p.t * p.t));
}

double koranyi_distance(const HeisenbergPoint& p, const HeisenbergPoint& q) {
  return koranyi_norm(mul(inverse(q), p));
}

HeisenbergPoint dilate(double r, const HeisenbergPoint& p) {
  if (!(r > 0)) throw ArgumentError("dilate: r must be positive");
  HeisenbergPoint out;
  out.z.resize(p.z.size());
  for (std::size_t i = 0; i < p.z.size(); ++i) out.z[i] = r * p.z[i];
  out.t = r * r * p.t;
  return out;
}

Point bundle_projection(const HeisenbergPoint& p) { return p.z; }

HorizontalSubgroup::HorizontalSubgroup(IsotropicSubspace base) : base_(std::move(base)) {
  if (!is_isotropic(base_.frame(), base_.frame().tolerance())) {
    throw ArgumentError("HorizontalSubgroup: base plane is not isotropic");
  }
}

HeisenbergPoint horizontal_projection(const HorizontalSubgroup& v, const HeisenbergPoint& p) {
  if (p.z.size() != v.base().frame().dim()) throw ArgumentError("horizontal_projection: dimension mismatch");
  return {v.base().project(p.z), 0.0};
}

HeisenbergPoint vertical_projection(const HorizontalSubgroup& v, const HeisenbergPoint& p) {
  return mul(p, inverse(horizontal_projection(v, p)));
}

EmpiricalMeasure vertical_coset_slab(const EmpiricalMeasure& cloud, const HorizontalSubgroup& v,
                                     const HeisenbergPoint& p, double delta) {
  if (!(delta > 0)) throw ArgumentError("vertical_coset_slab: delta must be positive");
  if (!cloud.metric().is_koranyi() || cloud.metric().heisenberg_n() != v.n() || p.n() != v.n()) {
    throw ArgumentError("vertical_coset_slab: cloud, subgroup and anchor must live in the same H^n");
  }
  const Frame& f = v.base().frame();
  const std::vector<double> anchor = f.coordinates(p.z);
  const std::size_t zd = f.dim();
  const double delta2 = delta * delta;
  std::vector<double> c(f.rank());
  const double scale = std::pow(2.0 * delta, -static_cast<double>(v.m()));
  return cloud.restrict(
      [&](std::size_t i) {
        f.coordinates_into(cloud.point(i).first(zd), c);
        double d2 = 0;
        for (std::size_t k = 0; k < c.size(); ++k) d2 += (c[k] - anchor[k]) * (c[k] - anchor[k]);
        return d2 <= delta2;
      },
      scale);
}

HeisenbergIFS::HeisenbergIFS(std::string name, std::vector<HeisenbergSimilitude> maps,
                             HeisenbergPoint witness_center, double witness_radius)
    : name_(std::move(name)), maps_(std::move(maps)), witness_center_(std::move(witness_center)),
      witness_radius_(witness_radius) {
  if (maps_.size() < 2) throw ConfigError("HeisenbergIFS: need at least two maps");
  if (!(witness_radius_ > 0)) throw ConfigError("HeisenbergIFS: witness radius must be positive");
  std::vector<HeisenbergPoint> centers;
  for (const HeisenbergSimilitude& f : maps_) {
    same_n(f.q, witness_center_);
    if (!(f.ratio > 0 && f.ratio < 1)) throw ConfigError("HeisenbergIFS: ratio must lie in (0, 1)");
    centers.push_back(f.apply(witness_center_));
    // f maps B(c, R) onto B(f(c), r R).
    if (koranyi_distance(centers.back(), witness_center_) + f.ratio * witness_radius_ >
        witness_radius_ * (1 + 1e-12)) {
      throw ConfigError("HeisenbergIFS '" + name_ + "': image of the witness ball leaves it");
    }
  }
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if (koranyi_distance(centers[i], centers[j]) <=
          (maps_[i].ratio + maps_[j].ratio) * witness_radius_) {
        throw ConfigError("HeisenbergIFS '" + name_ + "': witness images " + std::to_string(i) +
                          " and " + std::to_string(j) + " overlap");
      }
}

double similarity_dimension(const HeisenbergIFS& ifs) {
  auto moran = [&](double s) {
    double sum = 0;
    for (const auto& f : ifs.maps()) sum += std::pow(f.ratio, s);
    return sum - 1.0;
  };
  double lo = 0.0, hi = 2.0 * ifs.n() + 3.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (moran(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EmpiricalMeasure heisenberg_chaos_game(const HeisenbergIFS& ifs, std::size_t count,
                                       RngStream& rng, std::size_t burn_in) {
  if (count == 0) throw ArgumentError("heisenberg_chaos_game: count must be >= 1");
  const double s = similarity_dimension(ifs);
  std::vector<double> cumulative;
  double acc = 0;
  for (const auto& f : ifs.maps()) cumulative.push_back(acc += std::pow(f.ratio, s));
  for (double& c : cumulative) c /= acc;
  cumulative.back() = 1.0;

  HeisenbergPoint x = ifs.witness_center();
  std::vector<double> pts;
  pts.reserve(count * (x.z.size() + 1));
  for (std::size_t step = 0; step < burn_in + count; ++step) {
    const double u = rng.uniform();
    const std::size_t i = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                 cumulative.begin()),
        cumulative.size() - 1);
    x = ifs.maps()[i].apply(x);
    if (step >= burn_in) {
      pts.insert(pts.end(), x.z.begin(), x.z.end());
      pts.push_back(x.t);
    }
  }
  return EmpiricalMeasure::uniform(MetricTag::koranyi(ifs.n()), std::move(pts));
}

EmpiricalMeasure gauge_ball_sample(int n, std::size_t count, RngStream& rng, double radius) {
  if (n < 1) throw ArgumentError("gauge_ball_sample: n must be >= 1");
  if (!(radius > 0)) throw ArgumentError("gauge_ball_sample: radius must be positive");
  const std::size_t zd = 2 * static_cast<std::size_t>(n);
  std::vector<double> pts;
  pts.reserve(count * (zd + 1));
  HeisenbergPoint p{Point(zd), 0.0};
  std::size_t kept = 0;
  while (kept < count) {
    for (double& v : p.z) v = radius * (2.0 * rng.uniform() - 1.0);
    p.t = radius * radius * (0.5 * rng.uniform() - 0.25);
    if (koranyi_norm(p) > radius) continue;
    pts.insert(pts.end(), p.z.begin(), p.z.end());
    pts.push_back(p.t);
    ++kept;
  }
  return EmpiricalMeasure::uniform(MetricTag::koranyi(n), std::move(pts));
}

std::vector<std::string> heisenberg_catalogue_names() { return {"h_dust", "h_triangle", "h_square"}; }

HeisenbergIFS heisenberg_catalogue(const std::string& name) {
  auto ring = [](int count, double radius, double ratio) {
    std::vector<HeisenbergSimilitude> maps;
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      maps.push_back({{{radius * std::cos(a), radius * std::sin(a)}, 0.0}, ratio});
    }
    return maps;
  };
  const HeisenbergPoint origin = HeisenbergPoint::identity(1);
  if (name == "h_dust") {
    return HeisenbergIFS(name, {{{{0.5, 0.0}, 0.0}, 1.0 / 3.0}, {{{-0.5, 0.0}, 0.0}, 1.0 / 3.0}},
                         origin, 1.0);
  }
  if (name == "h_triangle") return HeisenbergIFS(name, ring(3, 0.6, 0.25), origin, 1.0);
  if (name == "h_square") return HeisenbergIFS(name, ring(4, 0.6, 1.0 / 3.0), origin, 1.0);
  throw ArgumentError("unknown Heisenberg catalogue set '" + name + "'");
}

}  // namespace isoproj
