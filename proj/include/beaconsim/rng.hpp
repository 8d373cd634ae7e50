#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace beaconsim {

// Deterministic RNG used everywhere randomness is needed. The mt19937_64
// engine output sequence is fixed by the standard; the distributions below
// are implemented by hand so that traces are bit-identical across platforms
// and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Exponential with rate lambda.
  double exponential(double lambda) {
    double u;
    do {
      u = uniform01();
    } while (u <= 0.0);
    return -std::log(u) / lambda;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  int binomial(int n, double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    int k = 0;
    for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Stateless mix for deriving per-replication seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace beaconsim
