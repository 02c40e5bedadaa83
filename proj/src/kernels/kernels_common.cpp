#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdlib>
#include <limits>

#include "isoproj/errors.hpp"
#include "isoproj/kernels.hpp"
#include "isoproj/measure.hpp"

namespace isoproj::kernels {

const KernelTable* avx2_table_if_built();

SoaCloud to_soa(std::span<const double> points, std::size_t dim, std::span<const double> weights) {
  if (dim == 0 || points.size() != weights.size() * dim) {
    throw ArgumentError("to_soa: points and weights disagree");
  }
  SoaCloud c;
  c.count = weights.size();
  c.dim = dim;
  c.data.resize(points.size());
  for (std::size_t j = 0; j < c.count; ++j) {
    for (std::size_t k = 0; k < dim; ++k) c.data[k * c.count + j] = points[j * dim + k];
  }
  c.weights.assign(weights.begin(), weights.end());
  return c;
}

SoaCloud to_soa(const EmpiricalMeasure& measure) {
  return to_soa(measure.points(), measure.dim(), measure.weights());
}

BinTable::BinTable(std::span<const double> sorted) : count_(sorted.size()) {
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i] > 0) || !std::isfinite(sorted[i])) {
      throw ArgumentError("BinTable: thresholds must be positive and finite");
    }
    if (i > 0 && sorted[i] < sorted[i - 1]) throw ArgumentError("BinTable: thresholds must be sorted");
  }
  if (sorted.size() >= 0xffff) throw ArgumentError("BinTable: too many thresholds");
  constexpr std::size_t kKeys = 0x8000;
  auto key_of = [](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return static_cast<std::size_t>((bits >> 48) & 0x7fff);
  };
  start_.assign(kKeys, 0);
  std::vector<unsigned> per_key(kKeys, 0);
  for (double t : sorted) ++per_key[key_of(t)];
  std::size_t below = 0;
  for (std::size_t k = 0; k < kKeys; ++k) {
    start_[k] = static_cast<std::uint16_t>(below);
    below += per_key[k];
    probes_ = std::max(probes_, per_key[k]);
  }
  padded_.assign(sorted.begin(), sorted.end());
  padded_.resize(sorted.size() + probes_ + 1, std::numeric_limits<double>::infinity());
}

double inverse_power(double v, double exponent) {
  if (exponent == 0.125) return 1.0 / std::sqrt(std::sqrt(std::sqrt(v)));
  if (exponent == 0.25) return 1.0 / std::sqrt(std::sqrt(v));
  if (exponent == 0.5) return 1.0 / std::sqrt(v);
  if (exponent == 1.0) return 1.0 / v;
  return std::pow(v, -exponent);
}

const KernelTable& active_kernels() {
  static const KernelTable* table = [] {
    const char* force = std::getenv("ISOPROJ_FORCE_SCALAR");
    if (force != nullptr && force[0] != '\0' && force[0] != '0') return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }();
  return *table;
}

const KernelTable* avx2_kernels() {
#if defined(__x86_64__) || defined(__i386__)
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return avx2_table_if_built();
#else
  return nullptr;
#endif
}

}  // namespace isoproj::kernels
