// SPDX-License-Identifier: Apache-2.0
/// \file tendencies.hpp
/// \brief Explicit right-hand sides of the interaction system.
///
/// Everything except viscosity, the auxiliary diffusivity and the relaxation
/// sink is assembled here; those three are integrated exactly by the stepper.
/// Advection is in convective form and every quadratic product goes through
/// the 2/3 rule before it is used.
#pragma once

#include <string>

#include "mtrx/errors.hpp"
#include "mtrx/field.hpp"
#include "mtrx/model.hpp"
#include "mtrx/spectral.hpp"

namespace mtrx {

struct Tendency {
  VectorField du;
  VectorField dv;
  Field dT_e;
  Field dq_e;
};

/// Dealiased u . grad(f).
inline Field advect(SpectralEngine& engine, const VectorField& u, const Field& f) {
  u.x.check_same_grid(f, "advect");
  const VectorField g = engine.grad(f);
  return engine.dealias(u.x * g.x + u.y * g.y);
}

/// Dealiased (u . grad) w, componentwise.
inline VectorField vector_advect(SpectralEngine& engine, const VectorField& u, const VectorField& w) {
  return VectorField(advect(engine, u, w.x), advect(engine, u, w.y));
}

/// Component i is sum_j d_j (v_j w_i); products are dealiased before the
/// derivative is taken.
inline VectorField tensor_divergence(SpectralEngine& engine, const VectorField& v, const VectorField& w) {
  v.x.check_same_grid(w.x, "tensor_divergence");
  auto component = [&](const Field& wi) {
    Spectrum a = engine.forward(v.x * wi);
    Spectrum b = engine.forward(v.y * wi);
    engine.dealias_in_place(a);
    engine.dealias_in_place(b);
    Spectrum s = engine.ddx(std::move(a));
    s += engine.ddy(std::move(b));
    return engine.inverse(s);
  };
  return VectorField(component(w.x), component(w.y));
}

namespace detail {

inline void require_finite(const Field& f, const char* term, double time) {
  if (!f.all_finite()) throw BlowUp(term, time);
}

} // namespace detail

/// Explicit part of d/dt (u, v, T_e, q_e):
///
///   du   = -P[(u.grad)u + div(v (x) v)]
///   dv   = -(u.grad)v - (v.grad)u + grad(T_e - q_e) / (1+alpha)
///   dT_e = -u.grad T_e + (1-Qbar) div v
///   dq_e = -u.grad q_e - (Qbar+alpha) div v
///
/// with P the Leray projector. Uses a fused transform schedule (33 FFTs);
/// the standalone advect / tensor_divergence give the same result.
inline Tendency explicit_tendency(SpectralEngine& engine, const State& s, const ModelParams& p) {
  const Grid& g = s.grid();
  if (!(g == engine.grid())) throw GridMismatch("explicit_tendency");
  detail::require_finite(s.u.x, "u", s.time);
  detail::require_finite(s.u.y, "u", s.time);
  detail::require_finite(s.v.x, "v", s.time);
  detail::require_finite(s.v.y, "v", s.time);
  detail::require_finite(s.T_e, "T_e", s.time);
  detail::require_finite(s.q_e, "q_e", s.time);

  const Spectrum ux = engine.forward(s.u.x), uy = engine.forward(s.u.y);
  const Spectrum vx = engine.forward(s.v.x), vy = engine.forward(s.v.y);
  const Spectrum te = engine.forward(s.T_e), qe = engine.forward(s.q_e);

  auto dx = [&](const Spectrum& a) { return engine.inverse(engine.ddx(a)); };
  auto dy = [&](const Spectrum& a) { return engine.inverse(engine.ddy(a)); };

  const Field ux_x = dx(ux), ux_y = dy(ux), uy_x = dx(uy), uy_y = dy(uy);
  const Field vx_x = dx(vx), vx_y = dy(vx), vy_x = dx(vy), vy_y = dy(vy);
  const Field te_x = dx(te), te_y = dy(te), qe_x = dx(qe), qe_y = dy(qe);

  const Field& Ux = s.u.x;
  const Field& Uy = s.u.y;
  const Field& Vx = s.v.x;
  const Field& Vy = s.v.y;
  const std::size_t N = g.size();

  // Pointwise products, assembled in one pass.
  Field nu_x(g), nu_y(g), vv_xx(g), vv_xy(g), vv_yy(g), nv_x(g), nv_y(g), nt(g), nq(g);
  for (std::size_t k = 0; k < N; ++k) {
    const double a = Ux[k], b = Uy[k], c = Vx[k], d = Vy[k];
    nu_x[k] = a * ux_x[k] + b * ux_y[k];
    nu_y[k] = a * uy_x[k] + b * uy_y[k];
    vv_xx[k] = c * c;
    vv_xy[k] = c * d;
    vv_yy[k] = d * d;
    // (u.grad)v + (v.grad)u
    nv_x[k] = a * vx_x[k] + b * vx_y[k] + c * ux_x[k] + d * ux_y[k];
    nv_y[k] = a * vy_x[k] + b * vy_y[k] + c * uy_x[k] + d * uy_y[k];
    nt[k] = a * te_x[k] + b * te_y[k];
    nq[k] = a * qe_x[k] + b * qe_y[k];
  }

  auto fwd = [&](const Field& f, const char* term) {
    detail::require_finite(f, term, s.time);
    Spectrum out = engine.forward(f);
    engine.dealias_in_place(out);
    return out;
  };

  Spectrum du_x = fwd(nu_x, "(u.grad)u");
  Spectrum du_y = fwd(nu_y, "(u.grad)u");
  {
    const Spectrum sxx = fwd(vv_xx, "div(v(x)v)");
    const Spectrum sxy = fwd(vv_xy, "div(v(x)v)");
    const Spectrum syy = fwd(vv_yy, "div(v(x)v)");
    du_x += engine.ddx(sxx);
    du_x += engine.ddy(sxy);
    du_y += engine.ddx(sxy);
    du_y += engine.ddy(syy);
  }
  du_x *= -1.0;
  du_y *= -1.0;
  engine.leray_in_place(du_x, du_y);

  Spectrum dv_x = fwd(nv_x, "(u.grad)v+(v.grad)u");
  Spectrum dv_y = fwd(nv_y, "(u.grad)v+(v.grad)u");
  dv_x *= -1.0;
  dv_y *= -1.0;
  {
    Spectrum buoy = te;
    buoy -= qe;
    const double c = 1.0 / (1.0 + p.alpha);
    dv_x.axpy(c, engine.ddx(buoy));
    dv_y.axpy(c, engine.ddy(buoy));
  }

  Spectrum divv = engine.ddx(vx);
  divv += engine.ddy(vy);

  Spectrum dte = fwd(nt, "u.grad T_e");
  dte *= -1.0;
  dte.axpy(1.0 - p.qbar, divv);

  Spectrum dq = fwd(nq, "u.grad q_e");
  dq *= -1.0;
  dq.axpy(-(p.qbar + p.alpha), divv);

  Tendency out{VectorField(engine.inverse(du_x), engine.inverse(du_y)),
               VectorField(engine.inverse(dv_x), engine.inverse(dv_y)), engine.inverse(dte),
               engine.inverse(dq)};
  detail::require_finite(out.dv.x, "grad(T_e-q_e)", s.time);
  detail::require_finite(out.dv.y, "grad(T_e-q_e)", s.time);
  detail::require_finite(out.dT_e, "(1-Qbar) div v", s.time);
  detail::require_finite(out.dq_e, "(Qbar+alpha) div v", s.time);
  return out;
}

} // namespace mtrx
