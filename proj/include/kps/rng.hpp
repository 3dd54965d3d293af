#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>

#include "kps/hash.hpp"

namespace kps {

// xoshiro256** seeded through splitmix64. Hand-rolled draws (no <random>
// distributions) so streams are bit-identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) {
      x += 0x9E3779B97F4A7C15ull;
      word = mix64(x);
    }
  }

  // Derives an independent generator for a named component, so sampling order
  // in one component never perturbs another.
  Rng fork(std::uint64_t stream_id) const {
    return Rng(mix64(s_[0] ^ mix64(stream_id + 0x517CC1B727220A95ull)));
  }

  std::uint64_t next_u64() {
    std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // n must be > 0; modulo bias is negligible for n << 2^64.
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    return next_u64() % n;
  }

  bool bernoulli(double p) { return next_double() < p; }

  double lognormal(double mu, double sigma) {
    // Box-Muller; draws two uniforms per sample.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return std::exp(mu + sigma * z);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace kps
