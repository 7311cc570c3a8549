#pragma once

// Seeded test imagery: skewed sources built from exponential noise plus a
// bright geometric pattern, the random mixing matrices used to combine them,
// and a small multiband cube made the same way.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "npsa/io.hpp"
#include "npsa/linalg.hpp"

namespace npsa {

namespace detail {

// Indicator of pattern `kind` at normalized coordinates (x, y) in [0, 1).
inline double pattern(std::size_t kind, double x, double y) {
  switch (kind % 5) {
    case 0: return (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5) < 0.08 ? 1.0 : 0.0;
    case 1: return std::sin(2.0 * std::numbers::pi * 3.0 * x) > 0.6 ? 1.0 : 0.0;
    case 2: return std::fmod(x + y, 0.5) < 0.1 ? 1.0 : 0.0;
    case 3: return (static_cast<int>(x * 6) + static_cast<int>(y * 6)) % 2 == 0 && y < 0.5 ? 1.0 : 0.0;
    default: {
      const double r = std::hypot(x - 0.3, y - 0.7);
      return r > 0.15 && r < 0.25 ? 1.0 : 0.0;
    }
  }
}

}  // namespace detail

inline constexpr double kPatternGain = 2.0;

/// `count` row-major side x side sources; source k is Exp(1) noise plus
/// kPatternGain times pattern k. All are positively skewed.
inline std::vector<Vector> synthetic_sources(std::size_t count, std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> noise(1.0);
  std::vector<Vector> out(count, Vector(side * side));
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        const double fx = static_cast<double>(x) / static_cast<double>(side);
        const double fy = static_cast<double>(y) / static_cast<double>(side);
        out[k][y * side + x] = noise(rng) + kPatternGain * detail::pattern(k, fx, fy);
      }
  return out;
}

/// Entries drawn from U(0, 1).
inline Matrix random_mixing(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Matrix b(n, n);
  for (double& v : b.data()) v = u01(rng);
  return b;
}

/// Standardized third moment E[(x - mean)^3] / sd^3 with 1/N normalization.
inline double sample_skewness(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

struct SyntheticCube {
  Cube cube;
  std::vector<Vector> sources;
  Matrix mixing;
};

/// A bands-band cube, side x side pixels: bands skewed sources mixed by a
/// U(0,1) matrix. The mixing draw follows the sources in the same stream.
inline SyntheticCube synthetic_cube(std::size_t side, std::size_t bands, std::uint64_t seed) {
  SyntheticCube sc;
  sc.sources = synthetic_sources(bands, side, seed);
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  sc.mixing = random_mixing(bands, rng);
  Matrix s(bands, side * side);
  for (std::size_t k = 0; k < bands; ++k)
    for (std::size_t n = 0; n < side * side; ++n) s(k, n) = sc.sources[k][n];
  sc.cube = from_data_matrix(sc.mixing * s, side, side);
  return sc;
}

}  // namespace npsa
