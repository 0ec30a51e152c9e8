#pragma once

#include <cstdint>

namespace detproc {

/**
 * Counter-based random generator.
 *
 * Output word i of stream s under seed k is
 *
 *     mix(mix(k * C0 ^ s * C1) + i * C2)
 *
 * where mix is the 64-bit splitmix/murmur finalizer
 * (x ^= x>>30; x *= 0xbf58476d1ce4e5b9; x ^= x>>27; x *= 0x94d049bb133111eb;
 *  x ^= x>>31). There is no sequential state beyond the counter, so any
 * (seed, stream, index) triple yields the same word on every platform and
 * streams can be consumed independently and in parallel.
 */
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream = 0)
      : base_(mix(seed * 0x9e3779b97f4a7c15ULL ^ stream * 0xd1b54a32d192ed03ULL)),
        index_(0) {}

  uint64_t next_u64() { return mix(base_ + (index_++) * 0xbf58476d1ce4e5b9ULL); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) {
    // 64-bit multiply-shift; bias is < 2^-53 for the small n used here.
    return uint64_t((__uint128_t(next_u64()) * n) >> 64);
  }

  static uint64_t mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

 private:
  uint64_t base_;
  uint64_t index_;
};

}  // namespace detproc
