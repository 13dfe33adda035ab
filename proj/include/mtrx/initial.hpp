// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "mtrx/errors.hpp"
#include "mtrx/model.hpp"
#include "mtrx/spectral.hpp"

namespace mtrx {

/// Named analytic family of initial data.
///
///  - "taylor-green": u = A (cos kx sin ky, -sin kx cos ky) with k = 2 pi m / L;
///    v = T_e = q_e = 0.
///  - "moist-blob": u as above, v = B perp-grad g, T_e = C g, q_e = -|D| g,
///    where g is a Gaussian of width sigma centred in the box.
///  - "random-smooth": band-limited random trigonometric polynomials with
///    modes |m| <= max_mode per axis, amplitudes A, B, C, D.
struct InitialSpec {
  std::string family = "moist-blob";
  double u_amplitude = 0.5;     // A
  double v_amplitude = 1.0;     // B
  double T_amplitude = 1.0;     // C
  double q_amplitude = 0.1;     // D, small enough for the blob core to saturate
  double width = 2.0;           // sigma
  int mode = 1;                 // m
  int max_mode = 4;
  std::uint64_t seed = 1;
  /// Fail (or, for random data, shift q_e) unless q_e <= 0 everywhere.
  bool require_nonpositive_qe = false;
};

namespace detail {

inline VectorField taylor_green(const Grid& g, double amplitude, int mode) {
  const double k = 2.0 * std::numbers::pi * mode / g.length();
  return VectorField(
      Field::sample(g, [&](double x, double y) { return amplitude * std::cos(k * x) * std::sin(k * y); }),
      Field::sample(g, [&](double x, double y) { return -amplitude * std::sin(k * x) * std::cos(k * y); }));
}

inline Field random_trig(const Grid& g, std::mt19937_64& rng, int max_mode, double amplitude) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double k0 = 2.0 * std::numbers::pi / g.length();
  Field f(g);
  for (int my = -max_mode; my <= max_mode; ++my)
    for (int mx = 0; mx <= max_mode; ++mx) {
      if (mx == 0 && my < 0) continue;
      const double a = coef(rng), b = coef(rng);
      const double decay = 1.0 / (1.0 + mx * mx + my * my);
      for (std::size_t j = 0; j < g.n(); ++j)
        for (std::size_t i = 0; i < g.n(); ++i) {
          const double ph = k0 * (mx * g.x(i) + my * g.y(j));
          f(i, j) += amplitude * decay * (a * std::cos(ph) + b * std::sin(ph));
        }
    }
  return f;
}

} // namespace detail

inline State make_initial_state(SpectralEngine& engine, const InitialSpec& spec) {
  const Grid& g = engine.grid();
  State s(g);
  if (spec.family == "taylor-green") {
    s.u = detail::taylor_green(g, spec.u_amplitude, spec.mode);
  } else if (spec.family == "moist-blob") {
    if (!(spec.width > 0.0)) throw ConfigError("moist-blob: width must be positive");
    s.u = detail::taylor_green(g, spec.u_amplitude, spec.mode);
    const double c = 0.5 * g.length(), s2 = spec.width * spec.width;
    auto gauss = [&](double x, double y) {
      return std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) / (2.0 * s2));
    };
    // perp-grad g = (-dg/dy, dg/dx)
    s.v = VectorField(Field::sample(g, [&](double x, double y) { return spec.v_amplitude * (y - c) / s2 * gauss(x, y); }),
                      Field::sample(g, [&](double x, double y) { return -spec.v_amplitude * (x - c) / s2 * gauss(x, y); }));
    s.T_e = Field::sample(g, [&](double x, double y) { return spec.T_amplitude * gauss(x, y); });
    const double d = std::abs(spec.q_amplitude);
    s.q_e = Field::sample(g, [&](double x, double y) { return -d * gauss(x, y); });
  } else if (spec.family == "random-smooth") {
    std::mt19937_64 rng(spec.seed);
    s.u = VectorField(detail::random_trig(g, rng, spec.max_mode, spec.u_amplitude),
                      detail::random_trig(g, rng, spec.max_mode, spec.u_amplitude));
    s.v = VectorField(detail::random_trig(g, rng, spec.max_mode, spec.v_amplitude),
                      detail::random_trig(g, rng, spec.max_mode, spec.v_amplitude));
    s.T_e = detail::random_trig(g, rng, spec.max_mode, spec.T_amplitude);
    s.q_e = detail::random_trig(g, rng, spec.max_mode, spec.q_amplitude);
    if (spec.require_nonpositive_qe) {
      const double top = s.q_e.max();
      if (top > 0.0)
        for (double& q : s.q_e.values()) q = std::min(q - top, 0.0);
    }
  } else {
    throw ConfigError("unknown initial-condition family '" + spec.family + "'");
  }
  s.u = engine.leray_project(s.u);
  if (spec.require_nonpositive_qe && s.q_e.max() > 0.0)
    throw ConfigError("initial q_e must be <= 0 for this experiment");
  return s;
}

} // namespace mtrx
