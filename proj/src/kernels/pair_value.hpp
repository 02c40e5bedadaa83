#pragma once

#include "isoproj/kernels.hpp"

namespace isoproj::kernels::detail {

// d^2 (Euclidean) or d^4 (Koranyi, points stored as z_1..z_2n, t).
// The AVX2 kernels evaluate the identical operation sequence lane-wise.
inline double pair_value(const SoaCloud& a, std::size_t i, const SoaCloud& b, std::size_t j,
                         PairMetric metric) {
  if (metric == PairMetric::Euclidean) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.dim; ++k) {
      const double d = a.coord(k)[i] - b.coord(k)[j];
      s = s + d * d;
    }
    return s;
  }
  const std::size_t n = (a.dim - 1) / 2;
  double z2 = 0.0;
  for (std::size_t k = 0; k < 2 * n; ++k) {
    const double d = a.coord(k)[i] - b.coord(k)[j];
    z2 = z2 + d * d;
  }
  double w = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    w = w + (b.coord(k)[j] * a.coord(n + k)[i] - b.coord(n + k)[j] * a.coord(k)[i]);
  }
  const double dt = (a.coord(2 * n)[i] - b.coord(2 * n)[j]) + 0.5 * w;
  return z2 * z2 + 16.0 * (dt * dt);
}

}  // namespace isoproj::kernels::detail
