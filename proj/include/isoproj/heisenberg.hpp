#pragma once

// The Heisenberg group H^n = R^{2n} x R with the law
// (z, t) * (w, s) = (z + w, t + s - omega(z, w) / 2), the Koranyi gauge,
// dilations, and the projections attached to horizontal subgroups.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "isoproj/measure.hpp"
#include "isoproj/rng.hpp"
#include "isoproj/symplectic.hpp"

namespace isoproj {

struct HeisenbergPoint {
  Point z;
  double t = 0.0;

  int n() const { return static_cast<int>(z.size() / 2); }
  /// Stored layout (z_1..z_2n, t).
  Point coords() const;
  static HeisenbergPoint from_coords(std::span<const double> c);
  static HeisenbergPoint identity(int n) { return {Point(2 * static_cast<std::size_t>(n), 0.0), 0.0}; }
};

HeisenbergPoint mul(const HeisenbergPoint& p, const HeisenbergPoint& q);
HeisenbergPoint inverse(const HeisenbergPoint& p);
/// (|z|^4 + 16 t^2)^{1/4}.
double koranyi_norm(const HeisenbergPoint& p);
/// ||q^{-1} p||.
double koranyi_distance(const HeisenbergPoint& p, const HeisenbergPoint& q);
/// (r z, r^2 t); throws ArgumentError for r <= 0.
HeisenbergPoint dilate(double r, const HeisenbergPoint& p);
Point bundle_projection(const HeisenbergPoint& p);

/// The subgroup V x {0} for an isotropic V.
class HorizontalSubgroup {
public:
  explicit HorizontalSubgroup(IsotropicSubspace base);
  const IsotropicSubspace& base() const { return base_; }
  int n() const { return base_.n(); }
  int m() const { return base_.m(); }

private:
  IsotropicSubspace base_;
};

/// (P_V z, 0).
HeisenbergPoint horizontal_projection(const HorizontalSubgroup& v, const HeisenbergPoint& p);
/// p * P_V(p)^{-1}.
HeisenbergPoint vertical_projection(const HorizontalSubgroup& v, const HeisenbergPoint& p);

/// Points q of the cloud with |P_V pi(q) - P_V pi(p)| <= delta (the band
/// around the coset V^perp * p), weights scaled by (2 delta)^{-m}. An empty
/// band gives an empty measure.
EmpiricalMeasure vertical_coset_slab(const EmpiricalMeasure& cloud, const HorizontalSubgroup& v,
                                     const HeisenbergPoint& p, double delta);

/// p -> q * dilate(ratio, p).
struct HeisenbergSimilitude {
  HeisenbergPoint q;
  double ratio = 0.5;

  HeisenbergPoint apply(const HeisenbergPoint& p) const { return mul(q, dilate(ratio, p)); }
};

class HeisenbergIFS {
public:
  /// Checks the separation witness: every image of the gauge ball
  /// B(center, radius) lies inside it and the images are pairwise disjoint.
  /// Throws ConfigError otherwise.
  HeisenbergIFS(std::string name, std::vector<HeisenbergSimilitude> maps,
                HeisenbergPoint witness_center, double witness_radius);

  const std::string& name() const { return name_; }
  int n() const { return witness_center_.n(); }
  const std::vector<HeisenbergSimilitude>& maps() const { return maps_; }
  const HeisenbergPoint& witness_center() const { return witness_center_; }
  double witness_radius() const { return witness_radius_; }

private:
  std::string name_;
  std::vector<HeisenbergSimilitude> maps_;
  HeisenbergPoint witness_center_;
  double witness_radius_;
};

/// Root of sum r_i^s = 1 (dimension with respect to the Koranyi metric).
double similarity_dimension(const HeisenbergIFS& ifs);

/// Random iteration with map probabilities r_i^s, started at the witness
/// center. Korányi-tagged measure with weights 1 / count.
EmpiricalMeasure heisenberg_chaos_game(const HeisenbergIFS& ifs, std::size_t count,
                                       RngStream& rng, std::size_t burn_in = 100);

/// Uniform (Haar) sample of the gauge ball ||p|| <= radius by rejection.
EmpiricalMeasure gauge_ball_sample(int n, std::size_t count, RngStream& rng, double radius = 1.0);

/// Built-in H^1 sets with horizontal translations and witness ball B(0, 1):
/// "h_dust" (N=2, r=1/3), "h_triangle" (N=3, r=1/4), "h_square" (N=4, r=1/3).
HeisenbergIFS heisenberg_catalogue(const std::string& name);
std::vector<std::string> heisenberg_catalogue_names();

}  // namespace isoproj
