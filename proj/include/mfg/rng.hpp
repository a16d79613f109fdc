#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mfg {

// SplitMix64 finalizer. Used to turn structured seed tuples
// (master seed, iteration, task index, ...) into well-spread stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive fold of seed components. mix_seed({s}) != splitmix64(s),
// and permuting components changes the result.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x8f1bbcdcbfa53e0bULL;
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ (p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  }
  return h;
}

// Seeded random stream. All draws go through hand-rolled conversions rather
// than std distributions so that results are identical across standard
// library implementations; reproducibility is part of the output contract.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in {0, ..., n-1}. n must be >= 1.
  int uniform_int(int n) {
    int v = static_cast<int>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  // Index draw from nonnegative weights summing to ~1. Floating point
  // residue falls through to the last index with positive weight.
  template <typename Row>
  int categorical(const Row& w, int n) {
    double u = uniform();
    double cum = 0.0;
    int last_pos = 0;
    for (int i = 0; i < n; ++i) {
      double wi = static_cast<double>(w[i]);
      if (wi > 0.0) last_pos = i;
      cum += wi;
      if (u < cum) return i;
    }
    return last_pos;
  }

  // Standard exponential; building block for Dirichlet(1) draws.
  double exponential() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mfg
