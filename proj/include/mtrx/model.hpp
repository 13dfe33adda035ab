// SPDX-License-Identifier: Apache-2.0
/// \file model.hpp
/// \brief Model state, parameters and the pointwise physics of the coupled
/// barotropic / first-baroclinic system with moisture.
///
/// Unknowns are the barotropic velocity u (divergence-free), the first
/// baroclinic velocity v, the equivalent temperature T_e = q + theta and the
/// equivalent moisture q_e = q - alpha*theta - qhat.
#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "mtrx/errors.hpp"
#include "mtrx/field.hpp"
#include "mtrx/spectral.hpp"

namespace mtrx {

struct ModelParams {
  double alpha = 0.5;
  double qbar = 0.9;
  /// Relaxation time. Zero selects the limiting (constrained) system.
  double epsilon = 0.1;
  /// Moisture offset; only enters the (theta, q) <-> (T_e, q_e) conversion.
  double qhat = 1.0;
  double mu = 1.0;
  /// Auxiliary diffusivity on T_e and q_e. Zero gives the unregularized model.
  double eta = 0.0;

  bool is_limit() const noexcept { return epsilon == 0.0; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Returns `p` unchanged if it is admissible, throws ConstraintViolation
/// naming the first violated inequality otherwise.
inline ModelParams validate_params(const ModelParams& p) {
  auto fail = [](const std::string& what) { throw ConstraintViolation(what); };
  for (double v : {p.alpha, p.qbar, p.epsilon, p.qhat, p.mu, p.eta})
    if (!std::isfinite(v)) fail("non-finite parameter");
  if (!(p.qbar > 0.0 && p.qbar < 1.0)) fail("Q̄ ∉ (0,1)");
  if (!(p.alpha + p.qbar > 0.0)) fail("α+Q̄≤0");
  if (!(p.epsilon >= 0.0)) fail("ε<0");
  if (!(p.mu > 0.0)) fail("μ≤0");
  if (!(p.eta >= 0.0)) fail("η<0");
  if (!(p.qhat > 0.0)) fail("q̂≤0");
  return p;
}

struct State {
  VectorField u;
  VectorField v;
  Field T_e;
  Field q_e;
  double time = 0.0;

  explicit State(const Grid& grid) : u(grid), v(grid), T_e(grid), q_e(grid) {}
  State(VectorField u_, VectorField v_, Field te, Field qe, double t = 0.0)
      : u(std::move(u_)), v(std::move(v_)), T_e(std::move(te)), q_e(std::move(qe)), time(t) {
    const Grid& g = u.grid();
    if (!(v.grid() == g && T_e.grid() == g && q_e.grid() == g)) throw GridMismatch("State");
  }

  const Grid& grid() const noexcept { return u.grid(); }
  bool all_finite() const noexcept {
    return u.all_finite() && v.all_finite() && T_e.all_finite() && q_e.all_finite();
  }

  friend bool operator==(const State&, const State&) = default;
};

/// First-baroclinic potential temperature and moisture.
struct PhysicalVars {
  Field theta;
  Field q;
};

struct EquivalentVars {
  Field T_e;
  Field q_e;
};

inline EquivalentVars to_equivalent(const PhysicalVars& phys, const ModelParams& p) {
  phys.theta.check_same_grid(phys.q, "to_equivalent");
  EquivalentVars out{Field(phys.q.grid()), Field(phys.q.grid())};
  for (std::size_t k = 0; k < phys.q.size(); ++k) {
    const double th = phys.theta[k], q = phys.q[k];
    out.T_e[k] = q + th;
    out.q_e[k] = q - p.alpha * th - p.qhat;
  }
  return out;
}

inline PhysicalVars from_equivalent(const Field& T_e, const Field& q_e, const ModelParams& p) {
  T_e.check_same_grid(q_e, "from_equivalent");
  const double inv = 1.0 / (1.0 + p.alpha);
  PhysicalVars out{Field(T_e.grid()), Field(T_e.grid())};
  for (std::size_t k = 0; k < T_e.size(); ++k) {
    const double te = T_e[k], qe = q_e[k];
    out.theta[k] = (te - qe - p.qhat) * inv;
    out.q[k] = (p.alpha * te + qe + p.qhat) * inv;
  }
  return out;
}

/// Precipitation rate P = q_e^+ / epsilon.
inline Field precipitation_rate(const Field& q_e, const ModelParams& p) {
  if (p.epsilon == 0.0) throw EpsilonZero("precipitation_rate");
  const double s = 1.0 / p.epsilon;
  return q_e.map([s](double q) { return q > 0.0 ? s * q : 0.0; });
}

/// Sink magnitude in the q_e equation, (1+alpha) q_e^+ / epsilon, i.e.
/// (1+alpha) times precipitation_rate().
inline Field precipitation(const Field& q_e, const ModelParams& p) {
  if (p.epsilon == 0.0) throw EpsilonZero("precipitation");
  const double s = (1.0 + p.alpha) / p.epsilon;
  return q_e.map([s](double q) { return q > 0.0 ? s * q : 0.0; });
}

/// Three-dimensional fields at height z of a layer of depth H, rebuilt from
/// the barotropic and first-baroclinic vertical modes.
struct Reconstruction3D {
  VectorField V;
  Field W;
  Field Theta;
};

inline Reconstruction3D reconstruct_3d(SpectralEngine& engine, const State& s, const ModelParams& p,
                                       double z, double H) {
  if (!(H > 0.0)) throw ConfigError("reconstruct_3d: H must be positive");
  if (!(z >= 0.0 && z <= H)) throw ConfigError("reconstruct_3d: z outside [0, H]");
  const double phase = std::numbers::pi * z / H;
  const double c = std::numbers::sqrt2 * std::cos(phase);
  // sin(pi) is not exactly zero in floating point.
  const double sn = (z == 0.0 || z == H) ? 0.0 : std::numbers::sqrt2 * std::sin(phase);
  // cos(pi/2) is not exactly zero either.
  const double cs = (2.0 * z == H) ? 0.0 : c;

  VectorField V = s.u;
  V.axpy(cs, s.v);
  Field w = engine.div(s.v);
  w *= -H / std::numbers::pi;
  Field theta = from_equivalent(s.T_e, s.q_e, p).theta;
  return {std::move(V), sn * std::move(w), sn * std::move(theta)};
}

} // namespace mtrx
