// SPDX-License-Identifier: Apache-2.0
/// \file stepper.hpp
/// \brief Time integration of the relaxed (epsilon > 0) and limiting
/// (epsilon = 0) systems.
///
/// One step of size h is the Strang composition
///
///   S(h/2) o C(h) o S(h/2)
///
/// where S is the moisture substep and C the explicit core. For epsilon > 0,
/// S solves dq/dt = -((1+a)/eps) q^+ exactly; for epsilon = 0 it is the
/// pointwise projection q -> min(q, 0) onto the constraint set. C is the
/// explicit midpoint rule applied in integrating-factor form, with the heat
/// semigroups exp(mu h lap) on (u, v) and exp(eta h lap) on (T_e, q_e)
/// applied exactly in Fourier space.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "mtrx/checkpoint.hpp"
#include "mtrx/diagnostics.hpp"
#include "mtrx/errors.hpp"
#include "mtrx/model.hpp"
#include "mtrx/spectral.hpp"
#include "mtrx/tendencies.hpp"

namespace mtrx {

struct StepperConfig {
  double dt = 1e-3;
  /// Target Courant number for the adaptive cap.
  double cfl = 0.5;
  double min_dt = 1e-8;
  double max_dt = 1.0;
  /// When false the step is always cfg.dt (up to landing on t_end), which
  /// keeps sample times of different runs aligned.
  bool adaptive = true;
};

inline StepperConfig validate_config(const StepperConfig& c) {
  if (!(c.min_dt > 0.0 && c.min_dt <= c.dt && c.dt <= c.max_dt))
    throw ConfigError("stepper: need 0 < min_dt <= dt <= max_dt");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("stepper: cfl must lie in (0, 1]");
  return c;
}

/// Exact flow of dq/dt = -((1+a)/eps) q^+ over `dt`.
inline Field relax_substep(const Field& q_e, const ModelParams& p, double dt) {
  if (p.epsilon == 0.0) throw EpsilonZero("relax_substep");
  if (dt < 0.0) throw ConfigError("relax_substep: negative dt");
  if (dt == 0.0) return q_e;
  const double decay = std::exp(-(1.0 + p.alpha) * dt / p.epsilon);
  return q_e.map([decay](double q) { return q > 0.0 ? q * decay : q; });
}

/// Projection onto {q_e <= 0}.
inline Field limit_projection(const Field& q_e) {
  return q_e.map([](double q) { return q > 0.0 ? 0.0 : q; });
}

/// Speed of the fastest linear wave carried by the explicit coupling terms.
/// For b = T_e - q_e the (v, b) subsystem is v_t = grad b / (1+a),
/// b_t = (1+a) div v, which propagates at unit speed.
inline double coupling_wave_speed(const ModelParams& p) {
  return std::sqrt(((1.0 - p.qbar) + (p.qbar + p.alpha)) / (1.0 + p.alpha));
}

inline double max_advective_speed(const State& s) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.u.x.size(); ++k)
    m = std::max(m, std::hypot(s.u.x[k], s.u.y[k]) + std::hypot(s.v.x[k], s.v.y[k]));
  return m;
}

struct StepInfo {
  double dt = 0.0;
  double cfl = 0.0;
};

class Stepper {
public:
  Stepper(SpectralEngine& engine, const ModelParams& params, const StepperConfig& config)
      : engine_(engine), params_(validate_params(params)), config_(validate_config(config)) {}

  const ModelParams& params() const noexcept { return params_; }
  const StepperConfig& config() const noexcept { return config_; }

  /// Step size for the next step from `s`, never exceeding `limit`.
  double choose_dt(const State& s, double limit) const {
    double dt = std::min({config_.dt, config_.max_dt, limit});
    if (config_.adaptive) {
      const double dx = s.grid().dx();
      const double speed = max_advective_speed(s);
      double cap = config_.cfl * dx / coupling_wave_speed(params_);
      if (speed > 0.0) cap = std::min(cap, config_.cfl * dx / speed);
      if (cap < config_.min_dt)
        throw StepTooSmall("CFL limit " + std::to_string(cap) + " is below min_dt");
      dt = std::min(dt, cap);
    }
    return dt;
  }

  double courant(const State& s, double dt) const {
    return max_advective_speed(s) * dt / s.grid().dx();
  }

  /// One step with an automatically chosen size.
  State step(const State& s, StepInfo* info = nullptr) {
    const double dt = choose_dt(s, config_.max_dt);
    if (info) *info = {dt, courant(s, dt)};
    return advance(s, dt);
  }

  /// One Strang step of exactly `dt`.
  State advance(const State& s, double dt) {
    if (!(dt > 0.0)) throw ConfigError("advance: dt must be positive");
    try {
      State out = s;
      moisture_substep(out.q_e, 0.5 * dt);
      out = core(out, dt);
      moisture_substep(out.q_e, 0.5 * dt);
      reproject(out.u);
      if (!out.all_finite()) throw BlowUp("state", out.time);
      return out;
    } catch (const NonFinite&) {
      throw BlowUp("state", s.time);
    }
  }

  /// The explicit core alone (no moisture substep): explicit midpoint in
  /// integrating-factor form,
  ///
  ///   U*  = E(h/2) [U + h/2 N(U)]
  ///   U'  = E(h/2) [E(h/2) U + h N(U*)]
  State core(const State& s, double dt) {
    const Tendency n0 = explicit_tendency(engine_, s, params_);
    State mid = s;
    add(mid, 0.5 * dt, n0);
    diffuse(mid, 0.5 * dt);
    mid.time = s.time + 0.5 * dt;

    const Tendency n1 = explicit_tendency(engine_, mid, params_);
    State out = s;
    diffuse(out, 0.5 * dt);
    add(out, dt, n1);
    diffuse(out, 0.5 * dt);
    out.time = s.time + dt;
    return out;
  }

private:
  void moisture_substep(Field& q, double dt) const {
    q = params_.is_limit() ? limit_projection(q) : relax_substep(q, params_, dt);
  }

  static void add(State& s, double h, const Tendency& t) {
    s.u.axpy(h, t.du);
    s.v.axpy(h, t.dv);
    s.T_e.axpy(h, t.dT_e);
    s.q_e.axpy(h, t.dq_e);
  }

  void diffuse(State& s, double h) {
    auto heat = [&](Field& f, double nu) {
      if (nu == 0.0) return;
      Spectrum sp = engine_.forward(f);
      engine_.heat_in_place(sp, nu, h);
      f = engine_.inverse(sp);
    };
    heat(s.u.x, params_.mu);
    heat(s.u.y, params_.mu);
    heat(s.v.x, params_.mu);
    heat(s.v.y, params_.mu);
    heat(s.T_e, params_.eta);
    heat(s.q_e, params_.eta);
  }

  void reproject(VectorField& u) {
    Spectrum sx = engine_.forward(u.x), sy = engine_.forward(u.y);
    engine_.leray_in_place(sx, sy);
    u = VectorField(engine_.inverse(sx), engine_.inverse(sy));
  }

  SpectralEngine& engine_;
  ModelParams params_;
  StepperConfig config_;
};

using Observer = std::function<void(const State&, const DiagnosticsRecord&)>;

struct RunOptions {
  Observer observer;
  /// The observer sees every stride-th step, plus the initial and final state.
  std::size_t record_stride = 1;
  /// Where to write the last good state if the run blows up.
  std::optional<std::filesystem::path> checkpoint_dir;
};

/// Name of the checkpoint file for a state at time t.
inline std::string checkpoint_name(double time) {
  std::ostringstream os;
  os.precision(17);
  os << "state_t" << time << ".ckpt";
  return os.str();
}

/// Advances `s0` to exactly `t_end`. The observer sees the initial state and
/// every subsequent state, each with its diagnostics record.
inline State run(SpectralEngine& engine, const State& s0, const ModelParams& params,
                 const StepperConfig& config, double t_end, const RunOptions& options = {}) {
  if (t_end < s0.time) throw ConfigError("run: t_end precedes the initial time");
  Stepper stepper(engine, params, config);
  if (options.observer) options.observer(s0, make_record(engine, s0, stepper.params()));
  const std::size_t stride = std::max<std::size_t>(options.record_stride, 1);
  std::size_t steps = 0;
  State s = s0;
  // Tolerance for landing on t_end, relative to the step.
  const double slack = 1e-9 * config.dt;
  try {
    while (t_end - s.time > slack) {
      const double remaining = t_end - s.time;
      double dt = stepper.choose_dt(s, remaining);
      // Avoid leaving a sliver of a step at the end.
      if (remaining - dt <= slack) dt = remaining;
      const double cfl = stepper.courant(s, dt);
      State next = stepper.advance(s, dt);
      const bool last = t_end - next.time <= slack;
      if (last) next.time = t_end;
      if (options.observer && (++steps % stride == 0 || last))
        options.observer(next, make_record(engine, next, stepper.params(), &s, dt, cfl));
      s = std::move(next);
    }
  } catch (const BlowUp&) {
    if (options.checkpoint_dir) {
      std::filesystem::create_directories(*options.checkpoint_dir);
      checkpoint_write(s, stepper.params(), *options.checkpoint_dir / checkpoint_name(s.time));
    }
    throw;
  }
  return s;
}

} // namespace mtrx
