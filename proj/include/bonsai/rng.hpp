#pragma once

#include <cstdint>
#include <initializer_list>

namespace bonsai {

// splitmix64. Hand-rolled so that streams are bit-identical across platforms
// and standard libraries; reproducibility of runs is a hard contract here.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Lemire multiply-shift; bias is negligible for the
  // small ranges used here and the mapping is platform-independent.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<__uint128_t>(next()) * static_cast<__uint128_t>(n)) >> 64);
  }

  bool bit() { return (next() >> 63) != 0; }

  // Uniform double in [0, 1) with 53 bits.
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  Rng r(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
  r.next();
  return r.next() ^ b;
}

// Derives a child seed from a parent seed and a tag sequence, e.g.
// derive_seed(global, {m, n, d, v}) for per-lattice-node streams.
inline uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> parts) {
  uint64_t s = seed;
  for (uint64_t p : parts) s = mix_seed(s, p);
  return s;
}

}  // namespace bonsai
