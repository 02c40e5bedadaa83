#include "isoproj/fractal.hpp"

#include <algorithm>
#include <cmath>

#include "isoproj/errors.hpp"
#include "isoproj/pairwise.hpp"

namespace isoproj {

namespace {

constexpr double kOrthTol = 1e-10;

bool is_orthogonal(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  const Eigen::MatrixXd g = m.transpose() * m - Eigen::MatrixXd::Identity(m.rows(), m.cols());
  return g.size() == 0 || g.cwiseAbs().maxCoeff() <= kOrthTol;
}

// Half-width of the cube's shadow on unit direction u.
double shadow(const OrientedCube& c, const Eigen::VectorXd& u) {
  return c.half_side * (c.axes.transpose() * u).cwiseAbs().sum();
}

bool separated(const OrientedCube& a, const OrientedCube& b) {
  const Eigen::Map<const Eigen::VectorXd> ca(a.center.data(), a.center.size());
  const Eigen::Map<const Eigen::VectorXd> cb(b.center.data(), b.center.size());
  const Eigen::VectorXd diff = cb - ca;
  for (const OrientedCube* c : {&a, &b}) {
    for (Eigen::Index k = 0; k < c->axes.cols(); ++k) {
      const Eigen::VectorXd u = c->axes.col(k);
      const double gap = std::abs(diff.dot(u)) - shadow(a, u) - shadow(b, u);
      if (gap >= -1e-12) return true;
    }
  }
  return false;
}

bool cube_inside(const OrientedCube& inner, const OrientedCube& outer) {
  const Eigen::Map<const Eigen::VectorXd> ci(inner.center.data(), inner.center.size());
  const Eigen::Map<const Eigen::VectorXd> co(outer.center.data(), outer.center.size());
  const Eigen::VectorXd local = outer.axes.transpose() * (ci - co);
  const Eigen::MatrixXd rel = outer.axes.transpose() * inner.axes;
  for (Eigen::Index k = 0; k < local.size(); ++k) {
    const double reach = std::abs(local(k)) + inner.half_side * rel.row(k).cwiseAbs().sum();
    if (reach > outer.half_side + 1e-12) return false;
  }
  return true;
}

// Haar-random orthogonal matrix from real Gaussian QR with sign fix.
Eigen::MatrixXd haar_orthogonal(std::size_t d, RngStream& rng) {
  const Eigen::Index n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (qr.matrixQR()(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

SimilarityIFS equal_ratio_ifs(std::string name, std::size_t dim, double r,
                              const std::vector<Point>& translations) {
  std::vector<Similitude> maps;
  for (const Point& t : translations) {
    maps.push_back({r, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                                 static_cast<Eigen::Index>(dim)),
                    t});
  }
  OrientedCube unit{Point(dim, 0.5), 0.5,
                    Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim))};
  return SimilarityIFS(std::move(name), std::move(maps), std::move(unit));
}

}  // namespace

void Similitude::apply(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = translation.size();
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) s += rotation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * x[k];
    out[i] = ratio * s + translation[i];
  }
}

bool OrientedCube::contains(std::span<const double> x, double tol) const {
  for (Eigen::Index k = 0; k < axes.cols(); ++k) {
    double c = 0;
    for (std::size_t i = 0; i < center.size(); ++i) c += axes(static_cast<Eigen::Index>(i), k) * (x[i] - center[i]);
    if (std::abs(c) > half_side + tol) return false;
  }
  return true;
}

OrientedCube OrientedCube::image(const Similitude& f) const {
  OrientedCube out;
  out.center.resize(center.size());
  f.apply(center, out.center);
  out.half_side = half_side * f.ratio;
  out.axes = f.rotation * axes;
  return out;
}

SimilarityIFS::SimilarityIFS(std::string name, std::vector<Similitude> maps, OrientedCube witness)
    : name_(std::move(name)), maps_(std::move(maps)), witness_(std::move(witness)) {
  const std::size_t d = witness_.center.size();
  if (d == 0) throw ArgumentError("SimilarityIFS: empty witness cube");
  if (maps_.size() < 2) throw ArgumentError("SimilarityIFS: need at least two maps");
  if (static_cast<std::size_t>(witness_.axes.rows()) != d || !is_orthogonal(witness_.axes)) {
    throw ArgumentError("SimilarityIFS: witness axes must be an orthogonal d x d matrix");
  }
  for (const Similitude& f : maps_) {
    if (!(f.ratio > 0.0 && f.ratio < 1.0)) throw ArgumentError("SimilarityIFS: ratio must lie in (0, 1)");
    if (f.translation.size() != d || static_cast<std::size_t>(f.rotation.rows()) != d ||
        !is_orthogonal(f.rotation)) {
      throw ArgumentError("SimilarityIFS: map has the wrong shape or a non-orthogonal rotation");
    }
  }
  std::vector<OrientedCube> images;
  for (const Similitude& f : maps_) {
    images.push_back(witness_.image(f));
    if (!cube_inside(images.back(), witness_)) {
      throw ArgumentError("SimilarityIFS '" + name_ + "': image of the witness cube leaves it");
    }
  }
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j)
      if (!separated(images[i], images[j])) {
        throw ArgumentError("SimilarityIFS '" + name_ + "': witness images " + std::to_string(i) +
                            " and " + std::to_string(j) + " overlap");
      }
}

double similarity_dimension(const SimilarityIFS& ifs) {
  auto moran = [&](double s) {
    double sum = 0;
    for (const Similitude& f : ifs.maps()) sum += std::pow(f.ratio, s);
    return sum - 1.0;
  };
  double lo = 0.0, hi = static_cast<double>(ifs.dim()) + 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (moran(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EmpiricalMeasure chaos_game(const SimilarityIFS& ifs, std::size_t count, RngStream& rng,
                            std::size_t burn_in) {
  if (count == 0) throw ArgumentError("chaos_game: count must be >= 1");
  const double s = similarity_dimension(ifs);
  std::vector<double> cumulative;
  double acc = 0;
  for (const Similitude& f : ifs.maps()) cumulative.push_back(acc += std::pow(f.ratio, s));
  for (double& c : cumulative) c /= acc;
  cumulative.back() = 1.0;

  const std::size_t d = ifs.dim();
  Point x = ifs.witness().center, next(d);
  std::vector<double> pts;
  pts.reserve(count * d);
  for (std::size_t step = 0; step < burn_in + count; ++step) {
    const double u = rng.uniform();
    const std::size_t i = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    ifs.maps()[std::min(i, cumulative.size() - 1)].apply(x, next);
    std::swap(x, next);
    if (step >= burn_in) pts.insert(pts.end(), x.begin(), x.end());
  }
  return EmpiricalMeasure::uniform(MetricTag::euclidean(d), std::move(pts));
}

Eigen::MatrixXd embed_rotation(std::size_t ambient, std::uint64_t rotation_seed) {
  RngStream rng(rotation_seed, derive_stream(0xe3bed, ambient));
  return haar_orthogonal(ambient, rng);
}

SimilarityIFS product_embed(const SimilarityIFS& ifs, std::size_t ambient,
                            std::uint64_t rotation_seed) {
  const std::size_t d = ifs.dim();
  if (ambient < d) {
    throw ArgumentError("product_embed: ambient dimension " + std::to_string(ambient) +
                        " is below the base dimension " + std::to_string(d));
  }
  const Eigen::Index a = static_cast<Eigen::Index>(ambient), b = static_cast<Eigen::Index>(d);
  const Eigen::MatrixXd q = embed_rotation(ambient, rotation_seed);
  auto lift = [&](const Point& p) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(a);
    for (Eigen::Index i = 0; i < b; ++i) v(i) = p[static_cast<std::size_t>(i)];
    const Eigen::VectorXd r = q * v;
    return Point(r.data(), r.data() + r.size());
  };
  std::vector<Similitude> maps;
  for (const Similitude& f : ifs.maps()) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Identity(a, a);
    block.topLeftCorner(b, b) = f.rotation;
    maps.push_back({f.ratio, q * block * q.transpose(), lift(f.translation)});
  }
  Eigen::MatrixXd axes = Eigen::MatrixXd::Identity(a, a);
  axes.topLeftCorner(b, b) = ifs.witness().axes;
  OrientedCube witness{lift(ifs.witness().center), ifs.witness().half_side, q * axes};
  return SimilarityIFS(ifs.name() + "@R" + std::to_string(ambient), std::move(maps),
                       std::move(witness));
}

FrostmanReport frostman_exponent_check(const EmpiricalMeasure& measure, double s,
                                       std::span<const double> radii,
                                       const FrostmanOptions& options) {
  if (!(s > 0)) throw ArgumentError("frostman_exponent_check: s must be positive");
  if (radii.empty()) throw ArgumentError("frostman_exponent_check: no radii");
  if (measure.empty()) throw ArgumentError("frostman_exponent_check: empty measure");
  std::vector<double> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = measure.size();
  const std::size_t want = options.max_centers == 0 ? n : std::min(n, options.max_centers);
  std::vector<std::size_t> centers;
  for (std::size_t k = 0; k < want; ++k) centers.push_back(k * n / want);
  const std::vector<double> mass =
      ball_masses(measure, measure.metric(), centers, sorted, options.threads);

  FrostmanReport rep;
  rep.constant = options.constant;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      const double ratio = mass[c * sorted.size() + k] / std::pow(sorted[k], s);
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_center = centers[c];
        rep.worst_radius = sorted[k];
      }
    }
  }
  const auto p = measure.point(rep.worst_center);
  rep.worst_point.assign(p.begin(), p.end());
  rep.pass = rep.worst_ratio <= options.constant;
  return rep;
}

std::vector<std::string> catalogue_names() { return {"cantor", "dust3_5", "dust8_4"}; }

SimilarityIFS catalogue_ifs(const std::string& name) {
  if (name == "cantor") return equal_ratio_ifs(name, 1, 1.0 / 3.0, {{0.0}, {2.0 / 3.0}});
  // Planar so that projections to different lines are not similar copies.
  if (name == "dust3_5") return equal_ratio_ifs(name, 2, 0.2, {{0.0, 0.0}, {0.8, 0.0}, {0.4, 0.8}});
  if (name == "dust8_4") {
    std::vector<Point> t;
    for (int mask = 0; mask < 16; ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) % 2 != 0) continue;
      Point p(4);
      for (int k = 0; k < 4; ++k) p[static_cast<std::size_t>(k)] = (mask >> k & 1) ? 0.75 : 0.0;
      t.push_back(p);
    }
    return equal_ratio_ifs(name, 4, 0.25, t);
  }
  throw ArgumentError("unknown catalogue set '" + name + "'");
}

SimilarityIFS catalogue_ifs(const std::string& name, std::size_t ambient) {
  SimilarityIFS base = catalogue_ifs(name);
  if (ambient == 0 || ambient == base.dim()) return base;
  return product_embed(base, ambient);
}

}  // namespace isoproj
