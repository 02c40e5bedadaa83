// AVX2 kernels. Compiled with -mavx2 only (no FMA) so every lane performs
// the same rounding sequence as detail::pair_value.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <bit>

#include "isoproj/kernels.hpp"
#include "isoproj/stats.hpp"
#include "pair_value.hpp"

namespace isoproj::kernels {

namespace {

using detail::pair_value;

constexpr std::size_t kMaxDim = 16;

struct RowBroadcast {
  __m256d c[kMaxDim];
};

inline __m256d pair_value4(const RowBroadcast& row, const SoaCloud& b, std::size_t j,
                           PairMetric metric, std::size_t dim) {
  if (metric == PairMetric::Euclidean) {
    __m256d s = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
      const __m256d d = _mm256_sub_pd(row.c[k], _mm256_loadu_pd(b.coord(k) + j));
      s = _mm256_add_pd(s, _mm256_mul_pd(d, d));
    }
    return s;
  }
  const std::size_t n = (dim - 1) / 2;
  __m256d z2 = _mm256_setzero_pd();
  for (std::size_t k = 0; k < 2 * n; ++k) {
    const __m256d d = _mm256_sub_pd(row.c[k], _mm256_loadu_pd(b.coord(k) + j));
    z2 = _mm256_add_pd(z2, _mm256_mul_pd(d, d));
  }
  __m256d w = _mm256_setzero_pd();
  for (std::size_t k = 0; k < n; ++k) {
    const __m256d bx = _mm256_loadu_pd(b.coord(k) + j);
    const __m256d by = _mm256_loadu_pd(b.coord(n + k) + j);
    w = _mm256_add_pd(w, _mm256_sub_pd(_mm256_mul_pd(bx, row.c[n + k]),
                                       _mm256_mul_pd(by, row.c[k])));
  }
  const __m256d dt = _mm256_add_pd(
      _mm256_sub_pd(row.c[2 * n], _mm256_loadu_pd(b.coord(2 * n) + j)),
      _mm256_mul_pd(_mm256_set1_pd(0.5), w));
  return _mm256_add_pd(_mm256_mul_pd(z2, z2),
                       _mm256_mul_pd(_mm256_set1_pd(16.0), _mm256_mul_pd(dt, dt)));
}

inline RowBroadcast broadcast_row(const SoaCloud& a, std::size_t i) {
  RowBroadcast r;
  for (std::size_t k = 0; k < a.dim; ++k) r.c[k] = _mm256_set1_pd(a.coord(k)[i]);
  return r;
}

// Integer-valued doubles in [0, 2^52) <-> int64 lanes.
inline __m256d int_bits_to_double(__m256i v) {
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(v, magic)),
                       _mm256_set1_pd(4503599627370496.0));
}

inline __m256d polevl(__m256d x, std::initializer_list<double> c) {
  auto it = c.begin();
  __m256d r = _mm256_set1_pd(*it++);
  for (; it != c.end(); ++it) r = _mm256_add_pd(_mm256_mul_pd(r, x), _mm256_set1_pd(*it));
  return r;
}

// Natural log for positive normal doubles (Cephes rational approximation).
inline __m256d log4(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i raw_exp = _mm256_srli_epi64(bits, 52);
  __m256d e = _mm256_sub_pd(int_bits_to_double(raw_exp), _mm256_set1_pd(1022.0));
  const __m256i mant_bits = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
      _mm256_set1_epi64x(0x3fe0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant_bits);  // [0.5, 1)
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d xs = _mm256_blendv_pd(_mm256_sub_pd(m, one),
                                      _mm256_sub_pd(_mm256_add_pd(m, m), one), small);
  const __m256d z = _mm256_mul_pd(xs, xs);
  const __m256d p = polevl(xs, {1.01875663804580931796E-4, 4.97494994976747001425E-1,
                                4.70579119878881725854E0, 1.44989225341610930846E1,
                                1.79368678507819816313E1, 7.70838733755885391666E0});
  const __m256d q = polevl(xs, {1.0, 1.12873587189167450590E1, 4.52279145837532221105E1,
                                8.29875266912776603211E1, 7.11544750618563894466E1,
                                2.31251620126765340583E1});
  __m256d y = _mm256_mul_pd(xs, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_sub_pd(y, _mm256_mul_pd(e, _mm256_set1_pd(2.121944400546905827679e-4)));
  y = _mm256_sub_pd(y, _mm256_mul_pd(z, _mm256_set1_pd(0.5)));
  return _mm256_add_pd(_mm256_add_pd(xs, y), _mm256_mul_pd(e, _mm256_set1_pd(0.693359375)));
}

// exp for arguments in [-700, 700] (Cephes Pade form).
inline __m256d exp4(__m256d x) {
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-700.0)), _mm256_set1_pd(700.0));
  const __m256d px = _mm256_floor_pd(
      _mm256_add_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)), _mm256_set1_pd(0.5)));
  x = _mm256_sub_pd(x, _mm256_mul_pd(px, _mm256_set1_pd(6.93145751953125E-1)));
  x = _mm256_sub_pd(x, _mm256_mul_pd(px, _mm256_set1_pd(1.42860682030941723212E-6)));
  const __m256d xx = _mm256_mul_pd(x, x);
  const __m256d p = _mm256_mul_pd(
      x, polevl(xx, {1.26177193074810590878E-4, 3.02994407707441961300E-2,
                     9.99999999999999999910E-1}));
  const __m256d q = polevl(xx, {3.00198505138664455042E-6, 2.52448340349684104192E-3,
                                2.27265548208155028766E-1, 2.00000000000000000009E0});
  __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  r = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(r, r));
  const __m256d biased = _mm256_add_pd(px, _mm256_set1_pd(1023.0 + 4503599627370496.0));
  const __m256i scale_bits = _mm256_slli_epi64(_mm256_castpd_si256(biased), 52);
  return _mm256_mul_pd(r, _mm256_castsi256_pd(scale_bits));
}

inline __m256d inverse_power4(__m256d v, double exponent) {
  const __m256d one = _mm256_set1_pd(1.0);
  if (exponent == 0.125) return _mm256_div_pd(one, _mm256_sqrt_pd(_mm256_sqrt_pd(_mm256_sqrt_pd(v))));
  if (exponent == 0.25) return _mm256_div_pd(one, _mm256_sqrt_pd(_mm256_sqrt_pd(v)));
  if (exponent == 0.5) return _mm256_div_pd(one, _mm256_sqrt_pd(v));
  if (exponent == 1.0) return _mm256_div_pd(one, v);
  return exp4(_mm256_mul_pd(_mm256_set1_pd(-exponent), log4(v)));
}

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void histogram_avx2(const PairBlock& blk, PairMetric metric, const BinTable& table,
                    std::uint64_t* counts, double* weight_sums) {
  if (blk.a->dim > kMaxDim) {
    scalar_kernels().histogram(blk, metric, table, counts, weight_sums);
    return;
  }
  const SoaCloud& a = *blk.a;
  const SoaCloud& b = *blk.b;
  alignas(32) double v[4];
  alignas(32) double wp[4];
  for (std::size_t i = blk.i_begin; i < blk.i_end; ++i) {
    const RowBroadcast row = broadcast_row(a, i);
    const double wi = a.weights[i];
    const __m256d wiv = _mm256_set1_pd(wi);
    std::size_t j = blk.upper ? std::max(blk.j_begin, i + 1) : blk.j_begin;
    for (; j + 4 <= blk.j_end; j += 4) {
      _mm256_store_pd(v, pair_value4(row, b, j, metric, a.dim));
      _mm256_store_pd(wp, _mm256_mul_pd(wiv, _mm256_loadu_pd(b.weights.data() + j)));
      for (int l = 0; l < 4; ++l) {
        const std::size_t bin = table.bin(v[l]);
        counts[bin] += 1;
        weight_sums[bin] += wp[l];
      }
    }
    for (; j < blk.j_end; ++j) {
      const std::size_t bin = table.bin(pair_value(a, i, b, j, metric));
      counts[bin] += 1;
      weight_sums[bin] += wi * b.weights[j];
    }
  }
}

void energy_avx2(const PairBlock& blk, PairMetric metric, double exponent, EnergyPartial& out) {
  if (blk.a->dim > kMaxDim) {
    scalar_kernels().energy(blk, metric, exponent, out);
    return;
  }
  const SoaCloud& a = *blk.a;
  const SoaCloud& b = *blk.b;
  NeumaierSum total, coincident;
  const __m256d zero = _mm256_setzero_pd(), one = _mm256_set1_pd(1.0);
  for (std::size_t i = blk.i_begin; i < blk.i_end; ++i) {
    const RowBroadcast row = broadcast_row(a, i);
    const double wi = a.weights[i];
    const __m256d wiv = _mm256_set1_pd(wi);
    __m256d acc = zero, acc_coincident = zero;
    std::size_t j = blk.upper ? std::max(blk.j_begin, i + 1) : blk.j_begin;
    for (; j + 4 <= blk.j_end; j += 4) {
      const __m256d v = pair_value4(row, b, j, metric, a.dim);
      const __m256d positive = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
      const __m256d safe = _mm256_blendv_pd(one, v, positive);
      const __m256d w = _mm256_mul_pd(wiv, _mm256_loadu_pd(b.weights.data() + j));
      const __m256d term = _mm256_mul_pd(w, inverse_power4(safe, exponent));
      acc = _mm256_add_pd(acc, _mm256_and_pd(term, positive));
      acc_coincident = _mm256_add_pd(acc_coincident, _mm256_andnot_pd(positive, w));
      out.coincident += static_cast<std::uint64_t>(std::popcount(
          static_cast<unsigned>(~_mm256_movemask_pd(positive) & 0xf)));
    }
    double row_sum = hsum(acc), row_coincident = hsum(acc_coincident);
    for (; j < blk.j_end; ++j) {
      const double v = pair_value(a, i, b, j, metric);
      const double wp = wi * b.weights[j];
      if (v > 0.0) {
        row_sum += wp * inverse_power(v, exponent);
      } else {
        row_coincident += wp;
        out.coincident += 1;
      }
    }
    total.add(row_sum);
    coincident.add(row_coincident);
  }
  out.sum += total.value();
  out.coincident_weight += coincident.value();
}

}  // namespace

const KernelTable* avx2_table_if_built() {
  static const KernelTable table{"avx2", &histogram_avx2, &energy_avx2};
  return &table;
}

}  // namespace isoproj::kernels
