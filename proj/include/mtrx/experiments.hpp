// SPDX-License-Identifier: Apache-2.0
/// \file experiments.hpp
/// \brief Experiment harnesses: the epsilon sweep against the limiting
/// system, the continuous-dependence probe and the validation suite.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mtrx/config.hpp"
#include "mtrx/csv.hpp"
#include "mtrx/diagnostics.hpp"
#include "mtrx/initial.hpp"
#include "mtrx/stepper.hpp"

namespace mtrx {

/// Advances `s0` to `t_end` with constant steps of `stepper.config().dt`
/// (the last one shortened to land on t_end). `visit(state, k, last)` is
/// called for k = 0 (the initial state) and after every step. Runs with
/// the same dt and t_end visit bit-identical time sequences.
template <class Visit>
State fixed_step_run(Stepper& stepper, const State& s0, double t_end, Visit&& visit) {
  const double h = stepper.config().dt;
  const double slack = 1e-9 * h;
  State s = s0;
  std::size_t k = 0;
  visit(s, k, t_end - s.time <= slack);
  while (t_end - s.time > slack) {
    const double remaining = t_end - s.time;
    const double dt = remaining - h <= slack ? remaining : h;
    s = stepper.advance(s, dt);
    const bool last = t_end - s.time <= slack;
    if (last) s.time = t_end;
    visit(s, ++k, last);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Epsilon sweep

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual of the fit in log space.
  double residual = 0.0;
};

/// Least-squares line through (log x, log y). Empty when fewer than two
/// usable (positive, finite) points remain.
inline std::optional<LogLogFit> fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i)
    if (xs[i] > 0.0 && ys[i] > 0.0 && std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  const std::size_t n = lx.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

struct RateRow {
  double epsilon = 0.0;
  bool ok = true;
  std::string error;
  /// sup over samples of the L2 distance to the limit run.
  double sup_distance = 0.0;
  /// Time integral of |grad du|^2 + |grad dv|^2 over samples.
  double int_grad_distance_sq = 0.0;
  /// Time integral of |q_e^+|^2 / eps over every step.
  double int_qplus_over_eps = 0.0;
  double sup_qplus_over_eps = 0.0;
};

struct RateReport {
  std::vector<RateRow> rows;
  std::optional<LogLogFit> distance_fit;
  std::optional<LogLogFit> qplus_fit;
  double slope_min = 0.4;
  double slope_max = 0.7;
  /// Largest max(q_e) of the limit run over every step, and the scale
  /// max|q_e(0)| it is judged against.
  double limit_max_qe = 0.0;
  double limit_qe_scale = 0.0;

  bool slope_in_window() const {
    return distance_fit && distance_fit->slope >= slope_min && distance_fit->slope <= slope_max;
  }

  /// max / min of sup_t |q_e^+|^2/eps over successful rows.
  double qplus_spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rows)
      if (r.ok) {
        lo = std::min(lo, r.sup_qplus_over_eps);
        hi = std::max(hi, r.sup_qplus_over_eps);
      }
    return lo > 0.0 && std::isfinite(lo) ? hi / lo : std::numeric_limits<double>::infinity();
  }
};

namespace detail {

inline void trapezoid(double& acc, double& prev_value, double& prev_time, double value, double time, bool first) {
  if (!first) acc += 0.5 * (time - prev_time) * (value + prev_value);
  prev_value = value;
  prev_time = time;
}

inline ExperimentConfig sweep_config(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.stepper.adaptive = false;
  c.initial.require_nonpositive_qe = true;
  return c;
}

inline RateRow sweep_row(const ExperimentConfig& cfg, double epsilon, const std::vector<State>& limit_samples) {
  RateRow row;
  row.epsilon = epsilon;
  try {
    SpectralEngine engine(cfg.grid());
    const State s0 = make_initial_state(engine, cfg.initial);
    ModelParams p = cfg.params;
    p.epsilon = epsilon;
    Stepper stepper(engine, p, cfg.stepper);
    double q_prev = 0.0, q_time = 0.0, g_prev = 0.0, g_time = 0.0;
    std::size_t sample = 0;
    fixed_step_run(stepper, s0, cfg.t_end, [&](const State& s, std::size_t k, bool last) {
      const double q = positive_part_l2_sq(s.q_e) / epsilon;
      row.sup_qplus_over_eps = std::max(row.sup_qplus_over_eps, q);
      trapezoid(row.int_qplus_over_eps, q_prev, q_time, q, s.time, k == 0);
      if (k % cfg.record_stride == 0 || last) {
        if (sample >= limit_samples.size()) throw TimeMismatch("sweep: sample count differs from the limit run");
        const StateDistance d = state_distance(engine, s, limit_samples[sample]);
        row.sup_distance = std::max(row.sup_distance, d.l2_total);
        trapezoid(row.int_grad_distance_sq, g_prev, g_time, d.h1_uv * d.h1_uv, s.time, sample == 0);
        ++sample;
      }
    });
  } catch (const std::exception& e) {
    row = RateRow{.epsilon = epsilon, .ok = false, .error = e.what()};
  }
  return row;
}

} // namespace detail

/// Runs the limiting system once and one relaxed run per entry of
/// cfg.epsilon_list from the same initial state, all with the fixed step
/// cfg.stepper.dt. Up to `jobs` relaxed runs execute concurrently, each
/// with its own engine; rows come back in epsilon_list order.
inline RateReport epsilon_sweep(const ExperimentConfig& config, unsigned jobs = 1) {
  const ExperimentConfig cfg = detail::sweep_config(config);
  validate_experiment(cfg, true);
  RateReport report;
  report.slope_min = cfg.rate_slope_min;
  report.slope_max = cfg.rate_slope_max;

  std::vector<State> limit_samples;
  {
    SpectralEngine engine(cfg.grid());
    const State s0 = make_initial_state(engine, cfg.initial);
    report.limit_qe_scale = s0.q_e.max_abs();
    report.limit_max_qe = -std::numeric_limits<double>::infinity();
    ModelParams p = cfg.params;
    p.epsilon = 0.0;
    Stepper stepper(engine, p, cfg.stepper);
    fixed_step_run(stepper, s0, cfg.t_end, [&](const State& s, std::size_t k, bool last) {
      report.limit_max_qe = std::max(report.limit_max_qe, s.q_e.max());
      if (k % cfg.record_stride == 0 || last) limit_samples.push_back(s);
    });
  }

  const std::size_t count = cfg.epsilon_list.size();
  report.rows.resize(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++)
      report.rows[i] = detail::sweep_row(cfg, cfg.epsilon_list[i], limit_samples);
  };
  const unsigned threads = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<double> eps, dist, qint;
  for (const auto& r : report.rows)
    if (r.ok) {
      eps.push_back(r.epsilon);
      dist.push_back(r.sup_distance);
      qint.push_back(r.int_qplus_over_eps);
    }
  report.distance_fit = fit_loglog(eps, dist);
  report.qplus_fit = fit_loglog(eps, qint);
  return report;
}

inline constexpr const char* kRatesHeader =
    "epsilon,status,sup_l2_distance,int_grad_uv_distance_sq,int_qplus_sq_over_eps,sup_qplus_sq_over_eps";

inline std::string rates_csv(const RateReport& r) {
  std::string out = std::string(kRatesHeader) + '\n';
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{format_number(row.epsilon), row.ok ? "ok" : "failed"};
    for (double v : {row.sup_distance, row.int_grad_distance_sq, row.int_qplus_over_eps, row.sup_qplus_over_eps})
      cells.push_back(row.ok ? format_number(v) : std::string{});
    out += join_row(cells) + '\n';
  }
  return out;
}

inline std::string rates_summary(const RateReport& r) {
  std::ostringstream os;
  auto fit_line = [&](const char* name, const std::optional<LogLogFit>& f) {
    os << name << "_slope = " << (f ? format_number(f->slope) : "undefined") << '\n';
    os << name << "_fit_residual = " << (f ? format_number(f->residual) : "undefined") << '\n';
  };
  fit_line("distance", r.distance_fit);
  os << "distance_slope_window = [" << format_number(r.slope_min) << ", " << format_number(r.slope_max) << "]\n";
  os << "distance_slope_in_window = " << (r.slope_in_window() ? "yes" : "no") << '\n';
  fit_line("qplus_integral", r.qplus_fit);
  os << "sup_qplus_spread = " << format_number(r.qplus_spread()) << '\n';
  os << "limit_max_qe = " << format_number(r.limit_max_qe) << '\n';
  os << "limit_qe_scale = " << format_number(r.limit_qe_scale) << '\n';
  std::size_t failed = 0;
  for (const auto& row : r.rows) {
    if (!row.ok) {
      ++failed;
      os << "failed epsilon " << format_number(row.epsilon) << ": " << row.error << '\n';
    }
  }
  os << "rows = " << r.rows.size() << ", failed = " << failed << '\n';
  return os.str();
}

inline void write_rate_report(const RateReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "rates.csv", rates_csv(r));
  write_text_file(dir / "rates.txt", rates_summary(r));
}

// ---------------------------------------------------------------------------
// Continuous-dependence probe

/// Fixed smooth perturbation direction: a divergence-free mode-2 vortex on
/// u, a mode-2 wave on v and T_e, and a negative Gaussian bump on q_e.
inline State probe_perturbation(SpectralEngine& engine) {
  const Grid& g = engine.grid();
  const double k = 4.0 * std::numbers::pi / g.length();
  const double c = 0.5 * g.length(), w = g.length() / 8.0;
  State p(g);
  p.u = engine.leray_project(detail::taylor_green(g, 1.0, 2));
  p.v = VectorField(Field::sample(g, [&](double, double y) { return std::sin(k * y); }),
                    Field::sample(g, [&](double x, double) { return std::sin(k * x); }));
  p.T_e = Field::sample(g, [&](double x, double y) { return std::cos(k * x) * std::cos(k * y); });
  p.q_e = Field::sample(g, [&](double x, double y) {
    return -std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) / (2.0 * w * w));
  });
  return p;
}

/// s + delta * direction, fieldwise.
inline State perturb(const State& s, const State& direction, double delta) {
  State out = s;
  out.u.axpy(delta, direction.u);
  out.v.axpy(delta, direction.v);
  out.T_e.axpy(delta, direction.T_e);
  out.q_e.axpy(delta, direction.q_e);
  return out;
}

struct ProbeRow {
  double delta = 0.0;
  double initial_distance = 0.0;
  double sup_distance = 0.0;
  /// sup_t |delta(t)| / |delta(0)|
  double amplification = 0.0;
  /// |delta(t_end)| / |delta(0)|
  double final_ratio = 0.0;
};

struct ProbeReport {
  std::vector<ProbeRow> rows;

  /// max / min amplification over the rows.
  double spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rows) {
      lo = std::min(lo, r.amplification);
      hi = std::max(hi, r.amplification);
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  bool finite() const {
    return std::all_of(rows.begin(), rows.end(), [](const ProbeRow& r) { return std::isfinite(r.amplification); });
  }
};

/// Steps the base run and one perturbed run per delta in lockstep with the
/// fixed step cfg.stepper.dt, tracking the L2 distance after every step.
inline ProbeReport continuous_dependence_probe(const ExperimentConfig& config, const std::vector<double>& deltas) {
  ExperimentConfig cfg = config;
  cfg.stepper.adaptive = false;
  validate_experiment(cfg, false);
  if (deltas.empty()) throw ConfigError("probe: empty delta list");
  for (double d : deltas)
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("probe: every delta must be positive");

  SpectralEngine engine(cfg.grid());
  Stepper stepper(engine, cfg.params, cfg.stepper);
  State base = make_initial_state(engine, cfg.initial);
  const double s0_time = base.time;
  const State direction = probe_perturbation(engine);
  std::vector<State> runs;
  ProbeReport report;
  for (double d : deltas) {
    runs.push_back(perturb(base, direction, d));
    const double d0 = state_distance(engine, runs.back(), base).l2_total;
    report.rows.push_back({.delta = d, .initial_distance = d0, .sup_distance = d0});
  }
  const double slack = 1e-9 * cfg.stepper.dt;
  while (cfg.t_end - base.time > slack) {
    const double remaining = cfg.t_end - base.time;
    const double dt = remaining - cfg.stepper.dt <= slack ? remaining : cfg.stepper.dt;
    base = stepper.advance(base, dt);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      runs[i] = stepper.advance(runs[i], dt);
      const double d = state_distance(engine, runs[i], base).l2_total;
      report.rows[i].sup_distance = std::max(report.rows[i].sup_distance, d);
      report.rows[i].final_ratio = d / report.rows[i].initial_distance;
    }
  }
  for (auto& r : report.rows) {
    r.amplification = r.sup_distance / r.initial_distance;
    if (base.time == s0_time) r.final_ratio = 1.0;
  }
  return report;
}

inline std::string probe_csv(const ProbeReport& r) {
  std::string out = "delta,initial_distance,sup_distance,amplification,final_ratio\n";
  for (const auto& row : r.rows)
    out += join_row({format_number(row.delta), format_number(row.initial_distance), format_number(row.sup_distance),
                     format_number(row.amplification), format_number(row.final_ratio)}) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Validation suite

enum class ValidationLevel { quick, full };

struct ValidationCheck {
  std::string name;
  double value = 0.0;
  std::string criterion;
  bool passed = false;
};

struct ValidationReport {
  ValidationLevel level = ValidationLevel::quick;
  std::vector<ValidationCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& c : checks)
      os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << format_number(c.value) << " (" << c.criterion << ")\n";
    os << (passed() ? "all checks passed" : "validation FAILED") << '\n';
    return os.str();
  }
};

namespace detail {

inline double relative_l2_error(const VectorField& got, const VectorField& want) {
  return l2_norm(got - want) / l2_norm(want);
}

inline ModelParams validation_params(double epsilon) {
  return {.alpha = 0.5, .qbar = 0.9, .epsilon = epsilon, .qhat = 1.0, .mu = 1.0, .eta = 0.0};
}

inline StepperConfig fixed_stepper(double dt) {
  return {.dt = dt, .cfl = 0.5, .min_dt = std::min(1e-8, dt), .max_dt = 1.0, .adaptive = false};
}

inline double shear_error(std::size_t n, double dt, double t_end) {
  const Grid g(n, 2.0 * std::numbers::pi);
  SpectralEngine engine(g);
  State s(g);
  s.u.x = Field::sample(g, [](double, double y) { return std::sin(y); });
  const ModelParams p = validation_params(0.05);
  const State out = run(engine, s, p, fixed_stepper(dt), t_end);
  VectorField exact = s.u;
  exact *= std::exp(-p.mu * t_end);
  return relative_l2_error(out.u, exact);
}

inline double taylor_green_error(std::size_t n, double dt, double t_end) {
  const Grid g(n, 2.0 * std::numbers::pi);
  SpectralEngine engine(g);
  State s(g);
  s.u = taylor_green(g, 1.0, 1);
  const ModelParams p = validation_params(0.05);
  const State out = run(engine, s, p, fixed_stepper(dt), t_end);
  VectorField exact = s.u;
  exact *= std::exp(-2.0 * p.mu * t_end);
  return l2_norm(out.u - exact);
}

inline ExperimentConfig moist_blob_config(std::size_t n) {
  ExperimentConfig c;
  c.n = n;
  c.params.epsilon = 0.05;
  c.initial.family = "moist-blob";
  return c;
}

/// Sum over steps of the per-step budget residual.
inline double accumulated_budget_residual(const ExperimentConfig& c, double dt, double t_end) {
  SpectralEngine engine(c.grid());
  const State s0 = make_initial_state(engine, c.initial);
  double sum = 0.0;
  RunOptions opts;
  opts.observer = [&](const State&, const DiagnosticsRecord& r) { sum += r.budget_residual; };
  run(engine, s0, c.params, fixed_stepper(dt), t_end, opts);
  return sum;
}

inline State moist_blob_final(const ExperimentConfig& c, double dt, double t_end) {
  SpectralEngine engine(c.grid());
  return run(engine, make_initial_state(engine, c.initial), c.params, fixed_stepper(dt), t_end);
}

} // namespace detail

/// Analytic regression checks. quick runs on N = 64, full on N = 128 and
/// adds dt refinement studies.
inline ValidationReport validation_suite(ValidationLevel level) {
  const bool full = level == ValidationLevel::full;
  const std::size_t n = full ? 128 : 64;
  ValidationReport report;
  report.level = level;
  auto add = [&](std::string name, double value, std::string criterion, bool ok) {
    report.checks.push_back({std::move(name), value, std::move(criterion), ok});
  };
  auto in_band = [](double r) { return r >= 3.0 && r <= 5.0; };

  {
    const Grid g(n, 2.0 * std::numbers::pi * 8.0);
    SpectralEngine engine(g);
    const State out = run(engine, State(g), detail::validation_params(0.05), detail::fixed_stepper(1e-3), 1e-2);
    double m = 0.0;
    for (const Field* f : {&out.u.x, &out.u.y, &out.v.x, &out.v.y, &out.T_e, &out.q_e}) m = std::max(m, f->max_abs());
    add("zero-state", m, "stays exactly zero", m == 0.0);
  }
  {
    const double e = detail::shear_error(n, 1e-3, 0.5);
    add("decaying-shear", e, "relative L2 error <= 1e-10", e <= 1e-10);
  }
  {
    const double e = detail::taylor_green_error(n, 1e-3, 0.5);
    add("taylor-green", e, "L2 error < 1e-4", e < 1e-4);
    if (full) {
      const double e2 = detail::taylor_green_error(n, 5e-4, 0.5);
      add("taylor-green-dt-halved", e2, "L2 error < 1e-4", e2 < 1e-4);
    }
  }
  {
    const ExperimentConfig c = detail::moist_blob_config(n);
    const double t_end = full ? 1.0 : 0.25;
    const double r1 = detail::accumulated_budget_residual(c, 4e-3, t_end);
    const double r2 = detail::accumulated_budget_residual(c, 2e-3, t_end);
    add("budget-refinement", r1 / r2, "accumulated residual ratio per dt halving in [3, 5]", in_band(r1 / r2));
    if (full) {
      const double r3 = detail::accumulated_budget_residual(c, 1e-3, t_end);
      add("budget-refinement-2", r2 / r3, "accumulated residual ratio per dt halving in [3, 5]", in_band(r2 / r3));
    }
  }
  {
    const Grid g(n, 2.0 * std::numbers::pi);
    SpectralEngine engine(g);
    InitialSpec spec;
    spec.family = "random-smooth";
    spec.seed = 7;
    State s = make_initial_state(engine, spec);
    const VectorField w = s.v;  // not projected
    const VectorField pw = engine.leray_project(w);
    const double idem = l2_norm(engine.leray_project(pw) - pw) / l2_norm(pw);
    add("leray-idempotent", idem, "relative <= 1e-10", idem <= 1e-10);
    const double div = engine.div(pw).max_abs() / engine.grad(w.x).x.max_abs();
    add("leray-divergence-free", div, "relative <= 1e-10", div <= 1e-10);
    const Field q = limit_projection(s.q_e);
    const bool ok = q.max() <= 0.0 && limit_projection(q) == q;
    add("limit-projection", q.max(), "max <= 0 and idempotent", ok);
  }
  if (full) {
    const ExperimentConfig c = detail::moist_blob_config(n);
    const double t_end = 0.5;
    SpectralEngine engine(c.grid());
    // Error of each step size against its own dt/4 reference.
    auto error = [&](double dt) {
      return state_distance(engine, detail::moist_blob_final(c, dt, t_end),
                            detail::moist_blob_final(c, dt / 4.0, t_end)).l2_total;
    };
    const double ratio = error(4e-3) / error(2e-3);
    add("temporal-convergence", ratio, "self-convergence ratio per dt halving in [3, 5]", in_band(ratio));
  }
  return report;
}

} // namespace mtrx
