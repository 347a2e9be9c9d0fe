#pragma once

#include <cmath>
#include <cstdint>

namespace causelog {

// Deterministic PRNG independent of the standard library's distributions,
// so identical seeds give identical output on every platform.
class SplitMix64 {
public:
  explicit SplitMix64(uint64_t seed = 0) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection keeps the draw unbiased.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    uint64_t threshold = (~n + 1) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Exponential inter-arrival time with the given rate (events per second).
  double exponential(double rate) {
    double u = uniform();
    return -std::log1p(-u) / rate;
  }

  // Exponential with mean `scale`, truncated to [0, bound].
  double truncated_exponential(double scale, double bound) {
    double u = uniform();
    double cap = 1.0 - std::exp(-bound / scale);
    return -scale * std::log1p(-u * cap);
  }

private:
  uint64_t state_;
};

// Stable mixing of sub-stream identifiers into a parent seed. Used to give
// every parallel work item its own reproducible stream.
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  SplitMix64 m(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL) ^
               (c * 0x165667b19e3779f9ULL));
  return m.next();
}

} // namespace causelog
