#pragma once

// Linear algebra of R^{2n} with its standard symplectic form.
//
// Coordinates are split as (x_1..x_n, y_1..y_n); the complex structure
// pairs x_i with y_i, so z = x + iy. Everything here is a pure function on
// values.

#include <cstddef>
#include <span>
#include <vector>

namespace isoproj {

inline constexpr double kDefaultTolerance = 1e-10;

using Point = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// omega(p, q) = sum_i (p_i q_{n+i} - p_{n+i} q_i).
double symplectic_form(std::span<const double> p, std::span<const double> q);

/// An orthonormal list of k vectors in R^d (stored row-major).
class Frame {
public:
  /// Validates orthonormality at `tolerance`; throws ArgumentError otherwise.
  Frame(std::size_t dim, std::vector<double> rows, double tolerance = kDefaultTolerance);

  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return rows_.size() / dim_; }
  double tolerance() const { return tolerance_; }

  std::span<const double> vector(std::size_t i) const {
    return {rows_.data() + i * dim_, dim_};
  }
  const std::vector<double>& rows() const { return rows_; }

  /// Chart coordinates <x, q_i>, i = 0..rank-1.
  std::vector<double> coordinates(std::span<const double> x) const;
  void coordinates_into(std::span<const double> x, std::span<double> out) const;

  /// Point of R^d with the given chart coordinates.
  Point embed(std::span<const double> coords) const;

private:
  std::size_t dim_;
  std::vector<double> rows_;
  double tolerance_;
};

/// Gram-Schmidt with one re-orthogonalization pass. Throws RankError when a
/// pivot norm drops below `tolerance`.
Frame orthonormalize(const std::vector<Point>& vectors, double tolerance = kDefaultTolerance);

/// True iff |omega(q_i, q_j)| <= tolerance for all pairs of frame vectors.
bool is_isotropic(const Frame& frame, double tolerance = kDefaultTolerance);

/// Orthogonal projection onto span(frame): sum_i <x, q_i> q_i.
Point project(const Frame& frame, std::span<const double> x);

/// Orthonormal basis of span(frame)^perp. Completes the frame with canonical
/// basis vectors, always taking the one with the largest residual (lowest
/// index on ties), so the result is fully deterministic.
Frame orthogonal_complement(const Frame& frame);

/// An m-dimensional isotropic subspace of R^{2n}, m <= n.
class IsotropicSubspace {
public:
  /// Throws ArgumentError if the frame is not isotropic or m > n.
  explicit IsotropicSubspace(Frame frame);

  int n() const { return static_cast<int>(frame_.dim() / 2); }
  int m() const { return static_cast<int>(frame_.rank()); }
  const Frame& frame() const { return frame_; }

  Point project(std::span<const double> x) const { return isoproj::project(frame_, x); }
  std::vector<double> coordinates(std::span<const double> x) const {
    return frame_.coordinates(x);
  }
  Frame complement() const { return orthogonal_complement(frame_); }

private:
  Frame frame_;
};

/// span{e_1, ..., e_m} in R^{2n}.
IsotropicSubspace canonical_isotropic(int n, int m);

}  // namespace isoproj
