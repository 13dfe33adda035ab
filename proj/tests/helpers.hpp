// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "mtrx/field.hpp"
#include "mtrx/grid.hpp"

namespace mtrx::test {

inline constexpr double kPi = std::numbers::pi;

inline Grid unit_torus(std::size_t n = 32) { return Grid(n, 2.0 * kPi); }

/// Random trigonometric polynomial with modes |m| <= max_mode per axis.
inline Field random_trig(const Grid& g, std::uint64_t seed, int max_mode = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double k0 = 2.0 * kPi / g.length();
  Field f(g);
  for (int my = -max_mode; my <= max_mode; ++my)
    for (int mx = 0; mx <= max_mode; ++mx) {
      const double a = coef(rng), b = coef(rng);
      for (std::size_t j = 0; j < g.n(); ++j)
        for (std::size_t i = 0; i < g.n(); ++i) {
          const double ph = k0 * (mx * g.x(i) + my * g.y(j));
          f(i, j) += a * std::cos(ph) + b * std::sin(ph);
        }
    }
  return f;
}

/// Uniform random samples; not band-limited.
inline Field random_samples(const Grid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Field f = Field::uninitialized(g);
  for (double& v : f.values()) v = d(rng);
  return f;
}

inline double max_diff(const Field& a, const Field& b) { return (a - b).max_abs(); }
inline double max_diff(const VectorField& a, const VectorField& b) {
  return std::max(max_diff(a.x, b.x), max_diff(a.y, b.y));
}

} // namespace mtrx::test
