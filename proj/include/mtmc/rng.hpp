#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mtmc {

// Portable random source for everything seeded in this project.
//
// Generator: SplitMix64. Streams: an independent generator for
// (seed, stream_id) starts from state mix64(seed ^ mix64(stream_id + golden)),
// where golden = 0x9E3779B97F4A7C15 and mix64 is the SplitMix64 finalizer.
// Derived draws:
//   uniform()        (next() >> 11) * 2^-53, in [0, 1)
//   normal()         Box-Muller on two uniforms (u1 -> 1 - u1), cosine branch
//   poisson(lambda)  Knuth's product-of-uniforms method
//   index(n)         floor(uniform() * n)
// Every draw consumes a fixed number of next() calls except poisson(), which
// consumes count + 1.

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream_id) {
    return SplitMix64(mix64(seed ^ mix64(stream_id + kGolden)));
  }

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t index(std::uint64_t n) {
    const auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  int poisson(double lambda) {
    if (!(lambda > 0)) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace mtmc
