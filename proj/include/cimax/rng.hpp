#pragma once

#include <cstdint>
#include <random>

#include "cimax/matrix.hpp"

namespace cimax {

// Deterministic random source. std::mt19937_64 supplies the bit stream;
// every mapping from bits to values lives here because the standard leaves
// distribution algorithms implementation-defined, and identical seeds must
// reproduce identical values on any toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0, unbiased by rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();

  // Generator for an independent substream keyed by (a, b), derived from the
  // base seed so the substream layout does not depend on draw order.
  Rng derive(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = base_seed_;
    s = mix(s ^ (0x9E3779B97F4A7C15ull * (a + 1)));
    s = mix(s ^ (0xD1B54A32D192ED03ull * (b + 1)));
    return Rng(s);
  }

 private:
  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t base_seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Matrix gaussian_matrix(int rows, int cols, Rng& rng);
Vector gaussian_vector(int n, Rng& rng);

}  // namespace cimax
