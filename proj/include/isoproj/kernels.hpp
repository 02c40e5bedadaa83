#pragma once

// Pairwise kernels behind the energy and correlation estimators.
//
// Every kernel works on a pair value v: the squared distance (Euclidean) or
// the fourth power of the Koranyi distance. Thresholds and exponents are
// expressed in the same power, so no root is taken when counting.
//
// Two implementations exist: a scalar reference and an AVX2 variant. The
// histogram kernels agree bit for bit (same pair values, same accumulation
// order); energy sums agree to rounding. The active table is picked once per process
// from the CPU, and ISOPROJ_FORCE_SCALAR=1 pins the scalar table.

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace isoproj {
class EmpiricalMeasure;
}

namespace isoproj::kernels {

enum class PairMetric { Euclidean, Koranyi };

/// Coordinate-major copy of a point cloud: coordinate k of point j lives at
/// data[k * count + j].
struct SoaCloud {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> data;
  std::vector<double> weights;

  const double* coord(std::size_t k) const { return data.data() + k * count; }
};

SoaCloud to_soa(const EmpiricalMeasure& measure);
SoaCloud to_soa(std::span<const double> points_row_major, std::size_t dim,
                std::span<const double> weights);

/// Rows [i_begin, i_end) of `a` against columns [j_begin, j_end) of `b`. With
/// `upper` set, only pairs with j > i are visited (requires a == b).
struct PairBlock {
  const SoaCloud* a = nullptr;
  std::size_t i_begin = 0, i_end = 0;
  const SoaCloud* b = nullptr;
  std::size_t j_begin = 0, j_end = 0;
  bool upper = false;
};

/// Maps a pair value v >= 0 to the number of thresholds strictly below it.
/// A table keyed on the top 16 bits of v (exponent plus four mantissa bits)
/// gives the thresholds below the key's bucket; a fixed number of compares
/// against the few thresholds inside the bucket finishes the count.
class BinTable {
public:
  /// Thresholds must be positive, finite and sorted ascending.
  explicit BinTable(std::span<const double> sorted_thresholds);

  std::size_t size() const { return count_; }
  std::size_t bins() const { return count_ + 1; }

  std::size_t bin(double v) const {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    std::size_t idx = start_[(bits >> 48) & 0x7fff];
    for (unsigned k = 0; k < probes_; ++k) idx += padded_[idx] < v ? 1 : 0;
    return idx;
  }

private:
  std::size_t count_ = 0;
  unsigned probes_ = 0;
  std::vector<double> padded_;
  std::vector<std::uint16_t> start_;
};

/// Pair histogram: adds 1 to counts[bin(v)] and w_i w_j to weight_sums[bin(v)]
/// for each visited pair, rows in order and columns ascending within a row.
using HistogramFn = void (*)(const PairBlock& block, PairMetric metric, const BinTable& table,
                             std::uint64_t* counts, double* weight_sums);

struct EnergyPartial {
  double sum = 0.0;               // sum of w_i w_j v^{-exponent} over v > 0
  double coincident_weight = 0.0; // sum of w_i w_j over v == 0
  std::uint64_t coincident = 0;
};

using EnergyFn = void (*)(const PairBlock& block, PairMetric metric, double exponent,
                          EnergyPartial& out);

struct KernelTable {
  const char* name;
  HistogramFn histogram;
  EnergyFn energy;
};

const KernelTable& scalar_kernels();
/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();
/// The table used by the estimators.
const KernelTable& active_kernels();

/// v^{-exponent}; shortcuts for exponents that reduce to square roots.
double inverse_power(double v, double exponent);

}  // namespace isoproj::kernels
