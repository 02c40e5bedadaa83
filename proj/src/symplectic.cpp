#include "isoproj/symplectic.hpp"

#include <cmath>
#include <string>

#include "isoproj/errors.hpp"

namespace isoproj {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
}

// Subtract projections onto the first `count` rows of `basis`.
void subtract_projections(std::span<double> v, const std::vector<double>& basis, std::size_t count,
                          std::size_t dim) {
  for (std::size_t k = 0; k < count; ++k) {
    std::span<const double> q(basis.data() + k * dim, dim);
    const double c = dot(v, q);
    for (std::size_t i = 0; i < dim; ++i) v[i] -= c * q[i];
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double symplectic_form(std::span<const double> p, std::span<const double> q) {
  require_same_size(p, q, "symplectic_form");
  if (p.empty() || p.size() % 2 != 0) {
    throw ArgumentError("symplectic_form: points must have even positive dimension 2n");
  }
  const std::size_t n = p.size() / 2;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += p[i] * q[n + i] - p[n + i] * q[i];
  return s;
}

Frame::Frame(std::size_t dim, std::vector<double> rows, double tolerance)
    : dim_(dim), rows_(std::move(rows)), tolerance_(tolerance) {
  if (dim_ == 0 || rows_.empty() || rows_.size() % dim_ != 0) {
    throw ArgumentError("Frame: need k >= 1 vectors of a common positive dimension");
  }
  if (rank() > dim_) throw ArgumentError("Frame: more vectors than the ambient dimension");
  for (double v : rows_) {
    if (!std::isfinite(v)) throw ArgumentError("Frame: non-finite entry");
  }
  for (std::size_t i = 0; i < rank(); ++i) {
    for (std::size_t j = i; j < rank(); ++j) {
      const double g = dot(vector(i), vector(j)) - (i == j ? 1.0 : 0.0);
      if (std::abs(g) > tolerance_) {
        throw ArgumentError("Frame: vectors not orthonormal within tolerance");
      }
    }
  }
}

std::vector<double> Frame::coordinates(std::span<const double> x) const {
  std::vector<double> out(rank());
  coordinates_into(x, out);
  return out;
}

void Frame::coordinates_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_) throw ArgumentError("Frame::coordinates: dimension mismatch");
  for (std::size_t k = 0; k < rank(); ++k) {
    const double* q = rows_.data() + k * dim_;
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += x[i] * q[i];
    out[k] = s;
  }
}

Point Frame::embed(std::span<const double> coords) const {
  if (coords.size() != rank()) throw ArgumentError("Frame::embed: wrong number of coordinates");
  Point out(dim_, 0.0);
  for (std::size_t k = 0; k < rank(); ++k) {
    const double* q = rows_.data() + k * dim_;
    for (std::size_t i = 0; i < dim_; ++i) out[i] += coords[k] * q[i];
  }
  return out;
}

Frame orthonormalize(const std::vector<Point>& vectors, double tolerance) {
  if (vectors.empty()) throw ArgumentError("orthonormalize: empty input");
  const std::size_t dim = vectors.front().size();
  if (dim == 0) throw ArgumentError("orthonormalize: zero-dimensional vectors");
  std::vector<double> basis;
  basis.reserve(vectors.size() * dim);
  for (const Point& v : vectors) {
    if (v.size() != dim) throw ArgumentError("orthonormalize: dimension mismatch");
    Point w = v;
    const std::size_t done = basis.size() / dim;
    subtract_projections(w, basis, done, dim);
    subtract_projections(w, basis, done, dim);
    const double len = norm(w);
    if (len < tolerance) throw RankError("orthonormalize: input is numerically rank deficient");
    for (double& c : w) c /= len;
    basis.insert(basis.end(), w.begin(), w.end());
  }
  // Re-orthogonalized Gram-Schmidt lands near 1e-15; validate at the caller's tolerance.
  return Frame(dim, std::move(basis), std::max(tolerance, kDefaultTolerance));
}

bool is_isotropic(const Frame& frame, double tolerance) {
  if (frame.dim() % 2 != 0) return false;
  for (std::size_t i = 0; i < frame.rank(); ++i) {
    for (std::size_t j = i + 1; j < frame.rank(); ++j) {
      if (std::abs(symplectic_form(frame.vector(i), frame.vector(j))) > tolerance) return false;
    }
  }
  return true;
}

Point project(const Frame& frame, std::span<const double> x) {
  if (x.size() != frame.dim()) throw ArgumentError("project: dimension mismatch");
  return frame.embed(frame.coordinates(x));
}

Frame orthogonal_complement(const Frame& frame) {
  const std::size_t dim = frame.dim();
  std::vector<double> basis = frame.rows();
  std::vector<double> complement;
  const std::size_t wanted = dim - frame.rank();
  for (std::size_t added = 0; added < wanted; ++added) {
    const std::size_t have = basis.size() / dim;
    Point best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < dim; ++e) {
      Point w(dim, 0.0);
      w[e] = 1.0;
      subtract_projections(w, basis, have, dim);
      subtract_projections(w, basis, have, dim);
      const double len = norm(w);
      if (len > best_norm + 1e-12) {
        best_norm = len;
        best = std::move(w);
      }
    }
    for (double& c : best) c /= best_norm;
    basis.insert(basis.end(), best.begin(), best.end());
    complement.insert(complement.end(), best.begin(), best.end());
  }
  if (complement.empty()) {
    throw ArgumentError("orthogonal_complement: frame already spans the space");
  }
  return Frame(dim, std::move(complement), frame.tolerance());
}

IsotropicSubspace::IsotropicSubspace(Frame frame) : frame_(std::move(frame)) {
  if (frame_.dim() % 2 != 0) throw ArgumentError("IsotropicSubspace: ambient dimension must be 2n");
  if (frame_.rank() > frame_.dim() / 2) {
    throw ArgumentError("IsotropicSubspace: m > n, no isotropic subspace of that dimension");
  }
  if (!is_isotropic(frame_, frame_.tolerance())) {
    throw ArgumentError("IsotropicSubspace: frame is not isotropic");
  }
}

IsotropicSubspace canonical_isotropic(int n, int m) {
  if (n < 1 || m < 1 || m > n) throw ArgumentError("canonical_isotropic: need 1 <= m <= n");
  const std::size_t dim = 2 * static_cast<std::size_t>(n);
  std::vector<double> rows(static_cast<std::size_t>(m) * dim, 0.0);
  for (int k = 0; k < m; ++k) rows[static_cast<std::size_t>(k) * dim + k] = 1.0;
  return IsotropicSubspace(Frame(dim, std::move(rows)));
}

}  // namespace isoproj
