#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace licfg {

// Seeded generator with self-contained uniform/gaussian transforms, so
// streams are reproducible across standard-library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Lemire multiply-shift; bias is < 2^-64.
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(gen_()) * static_cast<uint64_t>(n)) >> 64);
  }

  // Standard normal via Box-Muller, second value cached.
  double gauss() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double t = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace licfg
