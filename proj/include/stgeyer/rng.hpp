#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace stgeyer {

/// Finalizer used to turn (seed, stream id) pairs into well-separated seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derive an independent stream seed from a master seed and a stream index.
/// Used so replicate i sees the same draws whether it runs sequentially or
/// on a worker thread.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ (stream * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull));
}

/// Seeded random stream with fully pinned-down draw semantics.
///
/// std::mt19937_64 output is specified by the standard; the standard
/// *distributions* are not, so every variate here is generated from raw
/// engine words with a fixed recipe. Identical seeds give identical draw
/// sequences on any conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Poisson variate by Knuth's product method; means above 16 are split
  /// into chunks and summed (a sum of independent Poissons is Poisson).
  std::int64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
      throw std::invalid_argument("poisson: mean must be finite and nonnegative");
    }
    std::int64_t total = 0;
    while (mean > 16.0) {
      total += poisson_small(16.0);
      mean -= 16.0;
    }
    return total + poisson_small(mean);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::int64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 engine_;
};

}  // namespace stgeyer
