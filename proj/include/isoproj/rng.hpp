#pragma once

#include <cstdint>
#include <random>

namespace isoproj {

/// SplitMix64 finalizer; used to derive engine seeds and stream ids.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream id for a (purpose, index) pair, stable across runs and platforms.
constexpr std::uint64_t derive_stream(std::uint64_t purpose, std::uint64_t index) {
  return mix64(purpose * 0x100000001b3ULL ^ mix64(index));
}

/// A reproducible random stream keyed by (seed, stream id).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The distribution transforms are written out here because the
/// std:: distributions are implementation-defined.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(mix64(seed ^ mix64(stream_id + 0x51ed))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Uniform integer on [0, bound). Lemire's rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via the Marsaglia polar method (only log and sqrt).
  double normal();

  /// Child stream, independent of this one's position.
  RngStream split(std::uint64_t index) const {
    return RngStream(seed_, derive_stream(stream_id_, index));
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace isoproj
