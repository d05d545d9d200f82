#pragma once

#include <cstdint>
#include <random>

namespace nfl {

// splitmix64: used to decorrelate (seed, stream) pairs before feeding a
// heavier generator. Distinct streams from the same seed are independent
// for all practical purposes, which is what makes per-path generators
// reproducible regardless of how paths are scheduled across threads.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a885397941ffULL;
  return z ^ (z >> 31);
}

// Deterministic per-stream generator. The (seed, stream) pair fully
// determines the sequence; typical use is stream = path index.
class PathRng {
 public:
  PathRng(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x5851f42d4c957f2dULL * (stream + 1));
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    eng_.seed(seq);
  }

  double uniform01() {
    // 53-bit mantissa in [0,1)
    return (eng_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via the polar (Marsaglia) method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nfl
