#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace aqnn {

// Deterministic PRNG used everywhere the toolkit needs randomness.
// Floats are derived from raw mt19937 words rather than the standard
// distributions, whose output is implementation-defined; identical seeds
// therefore produce identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}

  std::uint32_t next_u32() { return gen_(); }

  // Uniform index in [0, n). Lemire multiply-shift; n must be > 0.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<std::uint64_t>(next_u32()) * static_cast<std::uint64_t>(n)) >> 32);
  }

  // Uniform in [0, 1), 24-bit resolution.
  float unit_float() { return static_cast<float>(next_u32() >> 8) * (1.0f / 16777216.0f); }

  // Uniform in [0, 1), 53-bit resolution.
  double unit_double() {
    std::uint64_t hi = next_u32();
    std::uint64_t lo = next_u32();
    return static_cast<double>(((hi << 32) | lo) >> 11) * (1.0 / 9007199254740992.0);
  }

  float uniform(float lo, float hi) { return lo + (hi - lo) * unit_float(); }

  // Standard normal deviate via Box-Muller.
  double normal() {
    double u1 = unit_double();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = unit_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937 gen_;
};

}  // namespace aqnn
