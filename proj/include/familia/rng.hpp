#pragma once

#include <cstdint>
#include <random>

namespace familia {

// Deterministic random source used everywhere in the library.  A thin wrapper
// around std::mt19937_64 so that every draw goes through one of two audited
// primitives; this keeps runs bit-reproducible across platforms (the raw
// engine output is pinned by the standard, and we avoid std::uniform_*
// distributions whose algorithms are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).  Lemire's multiply-shift rejection method:
  // unbiased and needs no division in the common case.
  std::uint64_t uniform_index(std::uint64_t n) {
    __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      std::uint64_t threshold = (0ULL - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Stateless mixing function (splitmix64 finalizer).  Used to derive
// independent per-worker / per-iteration seeds from one master seed without
// the streams overlapping in practice.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace familia
