// Scalar reference kernels.

#include <algorithm>

#include "isoproj/kernels.hpp"
#include "isoproj/stats.hpp"
#include "pair_value.hpp"

namespace isoproj::kernels {

namespace {

using detail::pair_value;

void histogram_scalar(const PairBlock& blk, PairMetric metric, const BinTable& table,
                      std::uint64_t* counts, double* weight_sums) {
  const SoaCloud& a = *blk.a;
  const SoaCloud& b = *blk.b;
  for (std::size_t i = blk.i_begin; i < blk.i_end; ++i) {
    const double wi = a.weights[i];
    const std::size_t j0 = blk.upper ? std::max(blk.j_begin, i + 1) : blk.j_begin;
    for (std::size_t j = j0; j < blk.j_end; ++j) {
      const std::size_t bin = table.bin(pair_value(a, i, b, j, metric));
      counts[bin] += 1;
      weight_sums[bin] += wi * b.weights[j];
    }
  }
}

void energy_scalar(const PairBlock& blk, PairMetric metric, double exponent, EnergyPartial& out) {
  const SoaCloud& a = *blk.a;
  const SoaCloud& b = *blk.b;
  NeumaierSum total, coincident;
  for (std::size_t i = blk.i_begin; i < blk.i_end; ++i) {
    const double wi = a.weights[i];
    const std::size_t j0 = blk.upper ? std::max(blk.j_begin, i + 1) : blk.j_begin;
    double row = 0.0, row_coincident = 0.0;
    for (std::size_t j = j0; j < blk.j_end; ++j) {
      const double v = pair_value(a, i, b, j, metric);
      const double wp = wi * b.weights[j];
      if (v > 0.0) {
        row += wp * inverse_power(v, exponent);
      } else {
        row_coincident += wp;
        out.coincident += 1;
      }
    }
    total.add(row);
    coincident.add(row_coincident);
  }
  out.sum += total.value();
  out.coincident_weight += coincident.value();
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &histogram_scalar, &energy_scalar};
  return table;
}

}  // namespace isoproj::kernels
