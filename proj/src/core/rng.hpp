#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace rp {

// Seeded random source built on mt19937_64 with hand-rolled variate
// transforms. The engine's output sequence is pinned by the standard;
// std::uniform_real_distribution and friends are not, and would break
// bit-reproducibility across standard libraries.
class Rng {
public:
  explicit Rng(uint64_t seed) : root_(seed), gen_(mix(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // standard normal, Box-Muller (cosine branch)
  double normal() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // unbiased integer in [0, n)
  uint64_t below(uint64_t n) {
    uint64_t bound = n * (~uint64_t{0} / n);
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= bound);
    return x % n;
  }

  // index drawn with probability proportional to weights[i]; caller
  // guarantees a strictly positive total
  size_t weighted(std::span<const double> cumulative) {
    double u = uniform01() * cumulative.back();
    size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (cumulative[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

  // independent stream keyed on (root seed, stream id)
  Rng derive(uint64_t stream) const {
    return Rng(mix(root_ ^ mix(stream + 0x9E3779B97F4A7C15ull)));
  }

private:
  static uint64_t mix(uint64_t z) { // splitmix64 finalizer
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t root_;
  std::mt19937_64 gen_;
};

} // namespace rp
