#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace qdist {

// SplitMix64 (Steele/Lea/Flood). Tiny state, cheap seeding, good enough
// statistics for Monte Carlo use. We deliberately avoid std::uniform_*
// distributions everywhere: their output is not specified bit-for-bit across
// standard library implementations, and seeded runs must be reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return std::ldexp(static_cast<double>(next() >> 11), -53); }

  bool bernoulli(double p) { return next_double() < p; }

  // Inclusive bounds. Modulo bias is irrelevant at our range sizes and the
  // mapping is platform-stable, which is what matters here.
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double next_real(double lo, double hi) { return lo + next_double() * (hi - lo); }

 private:
  std::uint64_t state_;
};

// Hash-combines a tuple of values into one seed, for deriving independent
// substreams (e.g. per trial, per entity) from a master seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x7c0e1a39u;
  for (std::uint64_t p : parts) {
    SplitMix64 m(h ^ (p + 0x9e3779b97f4a7c15ULL));
    h = m.next();
  }
  return h;
}

}  // namespace qdist
