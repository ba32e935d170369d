#pragma once

// Deterministic per-trial random streams. Every trial derives its seed from
// (base_seed, trial_index) through a 64-bit avalanche mix so streams are
// reproducible and effectively independent across trial indices.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "stodyn/matrix.hpp"

namespace stodyn {

inline std::uint64_t avalanche64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
  return avalanche64(base_seed ^ avalanche64(trial_index));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double rademacher() { return (gen_() & 1ull) ? 1.0 : -1.0; }

  // Box-Muller, one deviate per call; no cached spare so the stream position
  // is a fixed function of the call count.
  double normal() {
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector unit_sphere(std::size_t dim) {
    Vector v(dim);
    double n = 0.0;
    do {
      for (auto& c : v) c = normal();
      n = norm(v);
    } while (n == 0.0);
    for (auto& c : v) c /= n;
    return v;
  }

  // Uniform over the solid ball of the given radius.
  Vector ball(std::size_t dim, double radius) {
    Vector v = unit_sphere(dim);
    double r = radius * std::pow(uniform01(), 1.0 / static_cast<double>(dim));
    for (auto& c : v) c *= r;
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace stodyn
