#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "rvp/disc.hpp"

namespace rvp {

// Deterministic combiner for deriving stream seeds (per particle, per beat)
// from a master seed; splitmix64 finalizer over a golden-ratio mix.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// Seeded random stream with library-independent double generation, so runs are
// reproducible across standard library versions. forced() pins u01() to a
// constant, for exercising update rules at exact r values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng forced(double r) {
    Rng rng(0);
    rng.forced_ = r;
    rng.is_forced_ = true;
    return rng;
  }

  // Uniform in the open interval (0, 1).
  double u01() {
    if (is_forced_) return forced_;
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * u01(); }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const double span = static_cast<double>(hi) - static_cast<double>(lo) + 1.0;
    int v = lo + static_cast<int>(u01() * span);
    return v > hi ? hi : v;
  }

  // Uniform over the disc of the given radius: radius * sqrt(u) gives a
  // density uniform in area; angle drawn second.
  DiscPoint in_disc(double radius) {
    const double r = radius * std::sqrt(u01());
    const double theta = 2.0 * std::numbers::pi * u01();
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  // Standard normal via Box-Muller (two u01 draws per call; no state), kept
  // library-independent for reproducibility.
  double gauss() {
    const double u1 = u01();
    const double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
  double forced_ = 0.0;
  bool is_forced_ = false;
};

}  // namespace rvp
