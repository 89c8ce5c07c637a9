#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qpseudo {

// Deterministic RNG. mt19937_64 is bit-reproducible by the standard; the
// distributions are hand-mapped here because std:: distribution output is
// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n), n >= 1.
  int uniform_int(int n) {
    return static_cast<int>(
        (static_cast<unsigned __int128>(gen_()) * static_cast<std::uint64_t>(n)) >> 64);
  }

  // Standard normal via Box-Muller; two raw draws per call, no caching.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qpseudo
