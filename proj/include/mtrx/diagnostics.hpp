// SPDX-License-Identifier: Apache-2.0
/// \file diagnostics.hpp
/// \brief Norms, the weighted energy and its dissipation, the discrete
/// energy-budget defect, and distances between states.
///
/// The energy is
///
///   E = 1/2 [ |u|^2 + |v|^2 + |T_e|^2 / ((1+a)(1-Q)) + |q_e|^2 / ((1+a)(Q+a)) ]
///
/// and for smooth solutions of the relaxed system dE/dt + D = 0 with
///
///   D = mu (|grad u|^2 + |grad v|^2) + |q_e^+|^2 / (eps (Q+a))
///     + eta (|grad T_e|^2 / ((1+a)(1-Q)) + |grad q_e|^2 / ((1+a)(Q+a))).
///
/// All norms are L2 over the torus; gradient norms are evaluated from the
/// Fourier coefficients.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "mtrx/errors.hpp"
#include "mtrx/field.hpp"
#include "mtrx/model.hpp"
#include "mtrx/spectral.hpp"

namespace mtrx {

struct Norms {
  double l2 = 0.0;
  double l4 = 0.0;
  double h1_semi = 0.0;
  double linf = 0.0;
};

/// (sum |f|^m dx^2)^(1/m) by grid quadrature.
inline double lm_norm(const Field& f, double m) {
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), m);
  return std::pow(s * f.grid().cell_area(), 1.0 / m);
}

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }
inline double l2_norm(const VectorField& w) { return std::sqrt(inner(w, w)); }

/// |grad f|_2 computed from the Fourier coefficients with the same
/// (Nyquist-free) derivative symbols as SpectralEngine::grad.
inline double h1_seminorm(SpectralEngine& engine, const Field& f) {
  const Spectrum s = engine.forward(f);
  const Grid& g = f.grid();
  const std::size_t n = g.n(), nk = g.nk();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double b = engine.ky(j);
    for (std::size_t i = 0; i < nk; ++i) {
      const double a = engine.kx(i);
      const double w = (i == 0 || i == n / 2) ? 1.0 : 2.0;
      sum += w * (a * a + b * b) * std::norm(s.at(i, j));
    }
  }
  return std::sqrt(sum * g.cell_area() / static_cast<double>(g.size()));
}

inline double h1_seminorm(SpectralEngine& engine, const VectorField& w) {
  return std::hypot(h1_seminorm(engine, w.x), h1_seminorm(engine, w.y));
}

inline Norms norms(SpectralEngine& engine, const Field& f) {
  return {l2_norm(f), lm_norm(f, 4.0), h1_seminorm(engine, f), f.max_abs()};
}

/// L4 norm of the pointwise magnitude of a vector field.
inline double l4_norm(const VectorField& w) { return lm_norm(w.magnitude(), 4.0); }

inline double positive_part_l2_sq(const Field& f) {
  double s = 0.0;
  for (double v : f.values())
    if (v > 0.0) s += v * v;
  return s * f.grid().cell_area();
}

inline double energy(const State& s, const ModelParams& p) {
  const double wt = 1.0 / ((1.0 + p.alpha) * (1.0 - p.qbar));
  const double wq = 1.0 / ((1.0 + p.alpha) * (p.qbar + p.alpha));
  return 0.5 * (inner(s.u, s.u) + inner(s.v, s.v) + wt * inner(s.T_e, s.T_e) +
                wq * inner(s.q_e, s.q_e));
}

inline double dissipation(SpectralEngine& engine, const State& s, const ModelParams& p) {
  const double hu = h1_seminorm(engine, s.u), hv = h1_seminorm(engine, s.v);
  double d = p.mu * (hu * hu + hv * hv);
  if (!p.is_limit()) d += positive_part_l2_sq(s.q_e) / (p.epsilon * (p.qbar + p.alpha));
  if (p.eta > 0.0) {
    const double ht = h1_seminorm(engine, s.T_e), hq = h1_seminorm(engine, s.q_e);
    d += p.eta * (ht * ht / ((1.0 + p.alpha) * (1.0 - p.qbar)) +
                  hq * hq / ((1.0 + p.alpha) * (p.qbar + p.alpha)));
  }
  return d;
}

inline constexpr double kEnergyFloor = 1e-30;

/// Relative defect of the energy identity over one step, with trapezoidal
/// dissipation: |E1 - E0 + dt (D0 + D1)/2| / max(E0, floor).
inline double budget_residual(SpectralEngine& engine, const State& before, const State& after,
                              const ModelParams& p) {
  if (!(before.grid() == after.grid())) throw GridMismatch("budget_residual");
  const double dt = after.time - before.time;
  if (!(dt > 0.0)) throw TimeMismatch("budget_residual: states are not consecutive in time");
  const double e0 = energy(before, p), e1 = energy(after, p);
  const double d0 = dissipation(engine, before, p), d1 = dissipation(engine, after, p);
  return std::abs(e1 - e0 + 0.5 * dt * (d0 + d1)) / std::max(e0, kEnergyFloor);
}

struct StateDistance {
  double l2_total = 0.0;
  double l2_u = 0.0;
  double l2_v = 0.0;
  double l2_T_e = 0.0;
  double l2_q_e = 0.0;
  /// sqrt(|grad(u_a - u_b)|^2 + |grad(v_a - v_b)|^2)
  double h1_uv = 0.0;
};

inline constexpr double kTimeMatchTolerance = 1e-12;

inline StateDistance state_distance(SpectralEngine& engine, const State& a, const State& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("state_distance");
  if (std::abs(a.time - b.time) > kTimeMatchTolerance)
    throw TimeMismatch("state_distance: states sampled at different times");
  const VectorField du = a.u - b.u, dv = a.v - b.v;
  const Field dt = a.T_e - b.T_e, dq = a.q_e - b.q_e;
  StateDistance d;
  d.l2_u = l2_norm(du);
  d.l2_v = l2_norm(dv);
  d.l2_T_e = l2_norm(dt);
  d.l2_q_e = l2_norm(dq);
  d.l2_total = std::sqrt(d.l2_u * d.l2_u + d.l2_v * d.l2_v + d.l2_T_e * d.l2_T_e + d.l2_q_e * d.l2_q_e);
  d.h1_uv = std::hypot(h1_seminorm(engine, du), h1_seminorm(engine, dv));
  return d;
}

struct DiagnosticsRecord {
  double time = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double budget_residual = 0.0;
  double l2_u = 0.0, l2_v = 0.0, l2_T_e = 0.0, l2_q_e = 0.0;
  double l4_u = 0.0, l4_v = 0.0;
  double h1_u = 0.0, h1_v = 0.0, h1_T_e = 0.0, h1_q_e = 0.0;
  /// |q_e^+|^2 / eps; absent for the limiting system.
  std::optional<double> qplus_l2_sq_over_eps;
  double max_qe = 0.0;
  /// sup |grad u|, monitored only.
  double grad_u_linf = 0.0;
  double cfl_used = 0.0;
  double dt_used = 0.0;
};

/// Builds the record of `s`. When `previous` is given, the budget residual
/// of the step previous -> s is filled in; otherwise it is zero.
inline DiagnosticsRecord make_record(SpectralEngine& engine, const State& s, const ModelParams& p,
                                     const State* previous = nullptr, double dt_used = 0.0,
                                     double cfl_used = 0.0) {
  DiagnosticsRecord r;
  r.time = s.time;
  r.energy = energy(s, p);
  r.dissipation = dissipation(engine, s, p);
  if (previous) r.budget_residual = budget_residual(engine, *previous, s, p);
  r.l2_u = l2_norm(s.u);
  r.l2_v = l2_norm(s.v);
  r.l2_T_e = l2_norm(s.T_e);
  r.l2_q_e = l2_norm(s.q_e);
  r.l4_u = l4_norm(s.u);
  r.l4_v = l4_norm(s.v);
  r.h1_u = h1_seminorm(engine, s.u);
  r.h1_v = h1_seminorm(engine, s.v);
  r.h1_T_e = h1_seminorm(engine, s.T_e);
  r.h1_q_e = h1_seminorm(engine, s.q_e);
  if (!p.is_limit()) r.qplus_l2_sq_over_eps = positive_part_l2_sq(s.q_e) / p.epsilon;
  r.max_qe = s.q_e.max();
  {
    const VectorField gx = engine.grad(s.u.x), gy = engine.grad(s.u.y);
    r.grad_u_linf = std::max({gx.x.max_abs(), gx.y.max_abs(), gy.x.max_abs(), gy.y.max_abs()});
  }
  r.cfl_used = cfl_used;
  r.dt_used = dt_used;
  return r;
}

} // namespace mtrx
