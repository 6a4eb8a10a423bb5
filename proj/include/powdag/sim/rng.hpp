#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace powdag::sim {

/// Seeded source of the simulation's randomness.
///
/// The engine is mt19937_64; the samplers below are written out rather than
/// taken from <random> because the standard distributions are not required
/// to produce the same values on every library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Independent stream for a named purpose, so draws on one stream never
  /// shift the draws of another.
  static Rng derived(std::uint64_t seed, std::uint64_t salt) { return Rng(mix(seed ^ mix(salt))); }

  std::uint64_t next() { return gen_(); }

  /// Uniform on [0, 1), 53 bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Knuth's product method; fine for the small means used here.
  std::uint32_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint32_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  /// Index drawn with probability proportional to weights[i].
  std::size_t pick(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return weights.size() - 1;
  }

  bool bernoulli(double prob) { return uniform() < prob; }

  static std::uint64_t mix(std::uint64_t x) {  // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace powdag::sim
