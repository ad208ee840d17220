#pragma once

#include <cstdint>

#include "extsens/math.hpp"

namespace extsens {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// xoshiro256++ stream keyed by (seed, stream, substream). Substreams are
/// statistically independent, so replicates can be drawn in any order and on
/// any number of threads with identical results.
class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream = 0, uint64_t substream = 0) {
    uint64_t sm = seed;
    sm ^= 0x6a09e667f3bcc909ull + splitmix64_mix(stream);
    sm ^= splitmix64_mix(substream ^ 0x3c6ef372fe94f82bull);
    for (auto& word : s_) word = splitmix64(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  /// Standard normal via inverse CDF; reproducible across platforms.
  double normal() { return norm_quantile(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static uint64_t splitmix64_mix(uint64_t x) {
    uint64_t s = x;
    return splitmix64(s);
  }

  uint64_t s_[4];
};

}  // namespace extsens
