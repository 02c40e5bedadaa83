#pragma once

// Self-similar sets with known dimension and their natural measures.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isoproj/measure.hpp"
#include "isoproj/rng.hpp"
#include "isoproj/symplectic.hpp"

namespace isoproj {

/// x -> ratio * rotation * x + translation.
struct Similitude {
  double ratio = 0.5;
  Eigen::MatrixXd rotation;
  Point translation;

  void apply(std::span<const double> x, std::span<double> out) const;
};

/// Cube {center + axes * u : |u_i| <= half_side}; axes has orthonormal columns.
struct OrientedCube {
  Point center;
  double half_side = 0.5;
  Eigen::MatrixXd axes;

  bool contains(std::span<const double> x, double tol = 1e-9) const;
  OrientedCube image(const Similitude& f) const;
};

class SimilarityIFS {
public:
  /// Validates ratios in (0, 1), orthogonal rotations, and the open set
  /// condition witness: every image of `witness` lies inside it and the
  /// images are pairwise disjoint (interiors; a separating face normal must
  /// exist, so touching faces are allowed). Throws ArgumentError otherwise.
  SimilarityIFS(std::string name, std::vector<Similitude> maps, OrientedCube witness);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return witness_.center.size(); }
  const std::vector<Similitude>& maps() const { return maps_; }
  const OrientedCube& witness() const { return witness_; }

private:
  std::string name_;
  std::vector<Similitude> maps_;
  OrientedCube witness_;
};

/// Root of sum r_i^s = 1 by bisection on [0, dim + 1] to 1e-12.
double similarity_dimension(const SimilarityIFS& ifs);

/// Random iteration started at the witness center, map i picked with
/// probability r_i^s. The first `burn_in` iterates are dropped; each kept
/// point has weight 1 / count.
EmpiricalMeasure chaos_game(const SimilarityIFS& ifs, std::size_t count, RngStream& rng,
                            std::size_t burn_in = 100);

inline constexpr std::uint64_t kEmbedRotationSeed = 0x6d6f72616eULL;

/// Places the IFS in the first coordinates of R^ambient (the witness cube is
/// extended by the same half side in the new directions) and conjugates by a
/// fixed Haar-random rotation drawn from `rotation_seed`.
SimilarityIFS product_embed(const SimilarityIFS& ifs, std::size_t ambient,
                            std::uint64_t rotation_seed = kEmbedRotationSeed);

/// The rotation product_embed uses for a given ambient dimension and seed.
Eigen::MatrixXd embed_rotation(std::size_t ambient, std::uint64_t rotation_seed);

struct FrostmanReport {
  double worst_ratio = 0.0;
  std::size_t worst_center = 0;
  double worst_radius = 0.0;
  Point worst_point;
  double constant = 4.0;
  bool pass = false;  // worst_ratio <= constant
};

struct FrostmanOptions {
  double constant = 4.0;
  /// Centers are a strided subset of at most this many sample points (0 = all).
  std::size_t max_centers = 0;
  unsigned threads = 1;
};

/// Largest mu(B(x, r)) / r^s over sample points x and the given radii.
FrostmanReport frostman_exponent_check(const EmpiricalMeasure& measure, double s,
                                       std::span<const double> radii,
                                       const FrostmanOptions& options = {});

/// Built-in Euclidean catalogue: "cantor" (N=2, r=1/3, R^1), "dust3_5"
/// (N=3, r=1/5, R^2, triangle corners), "dust8_4" (N=8, r=1/4, R^4, even-parity corners).
SimilarityIFS catalogue_ifs(const std::string& name);
std::vector<std::string> catalogue_names();

/// Catalogue entry, embedded with product_embed when ambient exceeds its
/// native dimension (ambient 0 keeps the native dimension).
SimilarityIFS catalogue_ifs(const std::string& name, std::size_t ambient);

}  // namespace isoproj
