// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "helpers.hpp"
#include "mtrx/csv.hpp"
#include "mtrx/initial.hpp"
#include "mtrx/stepper.hpp"

namespace mtrx {
namespace {

using test::kPi;
using test::max_diff;

ModelParams reference_params(double epsilon) {
  return {.alpha = 0.5, .qbar = 0.9, .epsilon = epsilon, .qhat = 1.0, .mu = 1.0, .eta = 0.0};
}

StepperConfig fixed(double dt) { return {.dt = dt, .cfl = 0.5, .min_dt = 1e-10, .max_dt = 1.0, .adaptive = false}; }

TEST(RelaxSubstep, HalvesAtLogTwo) {
  const Grid g = test::unit_torus(16);
  const ModelParams p = reference_params(0.1);
  const double dt = std::log(2.0) * p.epsilon / (1.0 + p.alpha);
  EXPECT_NEAR(relax_substep(Field(g, 1.0), p, dt).max(), 0.5, 1e-15);
}

TEST(RelaxSubstep, NegativeMoistureUntouched) {
  const Grid g = test::unit_torus(16);
  for (double dt : {0.0, 1e-3, 10.0}) EXPECT_EQ(relax_substep(Field(g, -3.0), reference_params(0.1), dt), Field(g, -3.0));
}

TEST(RelaxSubstep, ZeroStepIsIdentity) {
  const Grid g = test::unit_torus(16);
  const Field q = test::random_samples(g, 1);
  EXPECT_EQ(relax_substep(q, reference_params(0.1), 0.0), q);
}

TEST(RelaxSubstep, ExactZeroIsInactive) {
  const Grid g = test::unit_torus(16);
  EXPECT_EQ(relax_substep(Field(g, 0.0), reference_params(0.1), 0.5), Field(g, 0.0));
  EXPECT_EQ(limit_projection(Field(g, 0.0)), Field(g, 0.0));
}

TEST(RelaxSubstep, Errors) {
  const Grid g = test::unit_torus(16);
  EXPECT_THROW(relax_substep(Field(g), reference_params(0.0), 0.1), EpsilonZero);
  EXPECT_THROW(relax_substep(Field(g), reference_params(0.1), -0.1), ConfigError);
}

TEST(RelaxSubstep, NeverCreatesPositiveMoistureOrFlipsSign) {
  const Grid g = test::unit_torus(32);
  const Field q = test::random_samples(g, 2);
  const Field r = relax_substep(q, reference_params(0.01), 0.3);
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] <= 0.0) EXPECT_EQ(r[k], q[k]);
    else {
      EXPECT_GE(r[k], 0.0);
      EXPECT_LT(r[k], q[k]);
    }
  }
}

TEST(LimitProjection, Examples) {
  const Grid g = test::unit_torus(16);
  const Field neg = test::random_samples(g, 3, -2.0, 0.0);
  EXPECT_EQ(limit_projection(neg), neg);
  EXPECT_EQ(limit_projection(Field(g, 0.7)).max_abs(), 0.0);
  const Field q = limit_projection(test::random_samples(g, 4));
  EXPECT_EQ(limit_projection(q), q);
}

TEST(LimitProjection, IsRelaxationEndpoint) {
  const Grid g = test::unit_torus(16);
  const Field q = test::random_samples(g, 5);
  // exp(-(1+a) dt / eps) underflows to zero for tiny eps.
  EXPECT_EQ(relax_substep(q, reference_params(1e-300), 1.0), limit_projection(q));
}

TEST(StepperConfigTest, Validation) {
  EXPECT_THROW(validate_config({.dt = 1e-3, .cfl = 0.0}), ConfigError);
  EXPECT_THROW(validate_config({.dt = 1e-3, .cfl = 1.5}), ConfigError);
  EXPECT_THROW(validate_config({.dt = 1e-3, .cfl = 0.5, .min_dt = 1e-2}), ConfigError);
  EXPECT_THROW(validate_config({.dt = 2.0, .cfl = 0.5, .min_dt = 1e-8, .max_dt = 1.0}), ConfigError);
  EXPECT_NO_THROW(validate_config({.dt = 1e-3, .cfl = 1.0}));
}

TEST(StepperCfl, CapsByAdvectionAndWaves) {
  const Grid g(32, 2.0 * kPi);
  SpectralEngine engine(g);
  Stepper stepper(engine, reference_params(0.1), {.dt = 1.0, .cfl = 0.5, .min_dt = 1e-8, .max_dt = 1.0});
  State s(g);
  EXPECT_DOUBLE_EQ(stepper.choose_dt(s, 10.0), 0.5 * g.dx() / coupling_wave_speed(stepper.params()));
  s.u.x = Field(g, 3.0);
  s.v.y = Field(g, 4.0);
  EXPECT_DOUBLE_EQ(stepper.choose_dt(s, 10.0), 0.5 * g.dx() / 7.0);
  EXPECT_DOUBLE_EQ(stepper.choose_dt(s, 1e-3), 1e-3);
  EXPECT_NEAR(stepper.courant(s, 0.01), 7.0 * 0.01 / g.dx(), 1e-15);
}

TEST(StepperCfl, WaveSpeedIsUnity) {
  for (double a : {-0.5, 0.0, 0.5, 3.0})
    EXPECT_NEAR(coupling_wave_speed({.alpha = a, .qbar = 0.9}), 1.0, 1e-15);
}

TEST(StepperCfl, StepTooSmall) {
  const Grid g(32, 2.0 * kPi);
  SpectralEngine engine(g);
  Stepper stepper(engine, reference_params(0.1), {.dt = 1e-3, .cfl = 0.5, .min_dt = 1e-4, .max_dt = 1.0});
  State s(g);
  s.u.x = Field(g, 1e6);
  EXPECT_THROW(stepper.choose_dt(s, 1.0), StepTooSmall);
}

TEST(Step, ZeroStateIsFixedPoint) {
  const Grid g(32, 2.0 * kPi);
  SpectralEngine engine(g);
  for (double eps : {0.1, 0.0}) {
    Stepper stepper(engine, reference_params(eps), fixed(0.05));
    State s = stepper.advance(State(g), 0.05);
    EXPECT_EQ(s.u, VectorField(g));
    EXPECT_EQ(s.v, VectorField(g));
    EXPECT_EQ(s.T_e, Field(g));
    EXPECT_EQ(s.q_e, Field(g));
    EXPECT_DOUBLE_EQ(s.time, 0.05);
  }
}

double shear_error(double dt) {
  const Grid g(32, 2.0 * kPi);
  SpectralEngine engine(g);
  State s(g);
  s.u.x = Field::sample(g, [](double, double y) { return 0.8 * std::sin(y); });
  const State out = run(engine, s, reference_params(0.1), fixed(dt), 0.5);
  return l2_norm(out.u.x - std::exp(-0.5) * s.u.x) + l2_norm(out.u.y);
}

TEST(Step, DecayingShearWithinSecondOrder) {
  for (double dt : {1e-2, 5e-3}) EXPECT_LE(shear_error(dt), dt * dt);
}

TEST(Step, TaylorGreenDecay) {
  const Grid g(32, 2.0 * kPi);
  SpectralEngine engine(g);
  State s(g);
  s.u = VectorField(Field::sample(g, [](double x, double y) { return std::cos(x) * std::sin(y); }),
                    Field::sample(g, [](double x, double y) { return -std::sin(x) * std::cos(y); }));
  const State out = run(engine, s, reference_params(0.1), fixed(1e-2), 0.5);
  VectorField want = s.u;
  want *= std::exp(-1.0);
  EXPECT_LE(l2_norm(out.u - want), 1e-10);
}

State blob(SpectralEngine& engine, double q_amplitude = 0.1) {
  InitialSpec spec;
  spec.q_amplitude = q_amplitude;
  return make_initial_state(engine, spec);
}

TEST(Step, VelocityStaysDivergenceFree) {
  const Grid g(32, 16.0 * kPi);
  SpectralEngine engine(g);
  State s = blob(engine);
  Stepper stepper(engine, reference_params(0.05), fixed(0.01));
  for (int i = 0; i < 5; ++i) s = stepper.advance(s, 0.01);
  EXPECT_LE(l2_norm(engine.div(s.u)), 1e-10 * std::max(1.0, l2_norm(s.u)));
}

TEST(Step, LimitPathStaysFeasible) {
  const Grid g(32, 16.0 * kPi);
  SpectralEngine engine(g);
  State s = blob(engine);
  const double scale = s.q_e.max_abs();
  Stepper stepper(engine, reference_params(0.0), fixed(0.02));
  for (int i = 0; i < 25; ++i) {
    s = stepper.advance(s, 0.02);
    EXPECT_LE(s.q_e.max(), 1e-14 * scale);
  }
}

TEST(Step, LimitUpdateEqualsFreeUpdateAwayFromConstraint) {
  const Grid g(32, 16.0 * kPi);
  SpectralEngine engine(g);
  Stepper stepper(engine, reference_params(0.0), fixed(0.02));
  State s = blob(engine);
  for (int i = 0; i < 20; ++i) s = stepper.advance(s, 0.02);
  ASSERT_LE(s.q_e.max(), 0.0);

  State free = stepper.core(s, 0.02);
  free.u = engine.leray_project(free.u);
  const State limited = stepper.advance(s, 0.02);
  double clamp = 0.0;
  for (double q : free.q_e.values()) clamp = std::max(clamp, q);
  ASSERT_GT(clamp, 0.0) << "the step should touch the constraint somewhere";
  std::size_t checked = 0;
  for (std::size_t k = 0; k < s.q_e.size(); ++k)
    if (free.q_e[k] < -clamp) {
      EXPECT_EQ(limited.q_e[k], free.q_e[k]);
      ++checked;
    }
  EXPECT_GT(checked, s.q_e.size() / 10);
  EXPECT_EQ(limited.u, free.u);
  EXPECT_EQ(limited.v, free.v);
  EXPECT_EQ(limited.T_e, free.T_e);
}

TEST(Step, MeanTemperatureConserved) {
  const Grid g(32, 16.0 * kPi);
  SpectralEngine engine(g);
  State s = blob(engine, 0.05);
  const double m0 = s.T_e.mean();
  Stepper stepper(engine, reference_params(0.05), fixed(0.02));
  for (int i = 0; i < 20; ++i) s = stepper.advance(s, 0.02);
  EXPECT_NEAR(s.T_e.mean(), m0, 1e-13 * std::max(1.0, s.T_e.max_abs()));
}

TEST(Step, EnergyNonIncreasing) {
  const Grid g(32, 16.0 * kPi);
  SpectralEngine engine(g);
  for (double eps : {0.05, 0.0}) {
    const ModelParams p = reference_params(eps);
    State s = blob(engine, 0.05);
    Stepper stepper(engine, p, fixed(0.02));
    double e = energy(s, p);
    for (int i = 0; i < 25; ++i) {
      s = stepper.advance(s, 0.02);
      const double e1 = energy(s, p);
      EXPECT_LE(e1, e * (1.0 + 1e-12)) << "epsilon=" << eps << " step " << i;
      e = e1;
    }
  }
}

TEST(Step, TemporalSelfConvergence) {
  const Grid g(64, 16.0 * kPi);
  auto final_state = [&](double dt) {
    SpectralEngine engine(g);
    return run(engine, blob(engine), reference_params(0.05), fixed(dt), 0.25);
  };
  SpectralEngine engine(g);
  auto error = [&](double dt) { return state_distance(engine, final_state(dt), final_state(dt / 4)).l2_total; };
  const double ratio = error(8e-3) / error(4e-3);
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 5.0);
}

TEST(Run, ZeroLengthRunReturnsInitialState) {
  const Grid g(16, 2.0 * kPi);
  SpectralEngine engine(g);
  State s(g);
  s.time = 2.0;
  s.T_e = test::random_trig(g, 6);
  int calls = 0;
  RunOptions opts;
  opts.observer = [&](const State&, const DiagnosticsRecord&) { ++calls; };
  EXPECT_EQ(run(engine, s, reference_params(0.1), fixed(0.01), 2.0, opts), s);
  EXPECT_EQ(calls, 1);
  EXPECT_THROW(run(engine, s, reference_params(0.1), fixed(0.01), 1.0), ConfigError);
}

TEST(Run, ObserverSeesEveryStepAndLandsOnEnd) {
  const Grid g(16, 2.0 * kPi);
  SpectralEngine engine(g);
  State s(g);
  s.T_e = test::random_trig(g, 7, 3);
  std::vector<double> times;
  RunOptions opts;
  opts.observer = [&](const State& st, const DiagnosticsRecord& r) {
    EXPECT_EQ(st.time, r.time);
    times.push_back(r.time);
  };
  const State out = run(engine, s, reference_params(0.1), fixed(0.03), 0.1, opts);
  ASSERT_EQ(times.size(), 5u);  // initial + 0.03, 0.06, 0.09, 0.1
  EXPECT_EQ(times.front(), 0.0);
  EXPECT_EQ(times.back(), 0.1);
  EXPECT_EQ(out.time, 0.1);
}

TEST(Run, RecordStrideKeepsEndpoints) {
  const Grid g(16, 2.0 * kPi);
  SpectralEngine engine(g);
  std::vector<double> times;
  RunOptions opts;
  opts.record_stride = 3;
  opts.observer = [&](const State&, const DiagnosticsRecord& r) { times.push_back(r.time); };
  run(engine, State(g), reference_params(0.1), fixed(0.01), 0.07, opts);
  ASSERT_EQ(times.size(), 4u);  // 0, step 3, step 6, step 7
  EXPECT_EQ(times.back(), 0.07);
}

TEST(Run, DeterministicCsv) {
  auto csv = [] {
    const Grid g(32, 16.0 * kPi);
    SpectralEngine engine(g);
    std::string out;
    RunOptions opts;
    opts.observer = [&](const State&, const DiagnosticsRecord& r) { out += series_row(r) + '\n'; };
    run(engine, blob(engine), reference_params(0.05), {.dt = 0.02, .cfl = 0.5}, 0.2, opts);
    return out;
  };
  EXPECT_EQ(csv(), csv());
}

TEST(Run, BlowUpWritesLastGoodCheckpoint) {
  const Grid g(16, 2.0 * kPi);
  SpectralEngine engine(g);
  State s(g);
  s.u = engine.leray_project(VectorField(test::random_trig(g, 8, 7), test::random_trig(g, 9, 7)));
  s.u *= 1e4;
  ModelParams p = reference_params(0.1);
  p.mu = 1e-6;
  const auto dir = std::filesystem::temp_directory_path() / "mtrx_blowup_test";
  std::filesystem::remove_all(dir);
  RunOptions opts;
  opts.checkpoint_dir = dir;
  EXPECT_THROW(run(engine, s, p, fixed(0.5), 1e3, opts), BlowUp);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    ++files;
    EXPECT_TRUE(checkpoint_read(e.path()).state.all_finite());
  }
  EXPECT_EQ(files, 1u);
  std::filesystem::remove_all(dir);
}

} // namespace
} // namespace mtrx
