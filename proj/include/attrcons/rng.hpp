#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "attrcons/errors.hpp"

namespace attrcons {

// Reported in experiment headers so results can be reproduced elsewhere.
// mt19937_64 output is pinned by the standard; every derived draw below is
// built from raw engine words, never from std::*_distribution (whose
// sequences vary between standard libraries).
inline constexpr const char* kRngAlgorithm = "mt19937_64";

// splitmix64 finalizer; decorrelates per-subject substreams from one master
// seed.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_unit() < p; }

  // Box-Muller; uses exactly two uniforms per call.
  double normal() {
    double u1 = next_unit();
    const double u2 = next_unit();
    if (u1 <= 0.0) {
      u1 = 0x1.0p-53;
    }
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }

  // Marsaglia-Tsang for shape >= 1, boosted below 1.
  double gamma(double shape) {
    if (shape <= 0.0) {
      throw ConfigError("gamma shape must be positive");
    }
    if (shape < 1.0) {
      const double u = next_unit();
      return gamma(shape + 1.0) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) {
        continue;
      }
      const double v = t * t * t;
      const double u = next_unit();
      if (u < 1.0 - 0.0331 * x * x * x * x) {
        return d * v;
      }
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v;
      }
    }
  }

  double beta(double alpha, double beta_param) {
    const double a = gamma(alpha);
    const double b = gamma(beta_param);
    const double sum = a + b;
    return sum > 0.0 ? a / sum : 0.5;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace attrcons
