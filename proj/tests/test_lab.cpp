// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "mtrx/checkpoint.hpp"
#include "mtrx/config.hpp"
#include "mtrx/csv.hpp"
#include "mtrx/experiments.hpp"

namespace mtrx {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(Config, ParsesDottedKeysCommentsAndLists) {
  const ExperimentConfig c = parse(
      "# experiment\n"
      "grid.n = 64   # points\n"
      "grid.length=12.5\n"
      "\n"
      "params.alpha = -0.25\n"
      "params.qbar = 0.4\n"
      "sweep.epsilon_list = 0.2, 0.1 ,0.05\n"
      "run.t_end = 0.5\n"
      "stepper.dt = 2e-3\n"
      "stepper.adaptive = false\n"
      "init.family = taylor-green\n"
      "init.seed = 42\n"
      "output.dir = results/a\n"
      "output.stride = 4\n");
  EXPECT_EQ(c.n, 64u);
  EXPECT_EQ(c.length, 12.5);
  EXPECT_EQ(c.params.alpha, -0.25);
  EXPECT_EQ(c.params.qbar, 0.4);
  EXPECT_EQ(c.epsilon_list, (std::vector<double>{0.2, 0.1, 0.05}));
  EXPECT_EQ(c.t_end, 0.5);
  EXPECT_EQ(c.stepper.dt, 2e-3);
  EXPECT_FALSE(c.stepper.adaptive);
  EXPECT_EQ(c.initial.family, "taylor-green");
  EXPECT_EQ(c.initial.seed, 42u);
  EXPECT_EQ(c.output_dir, "results/a");
  EXPECT_EQ(c.record_stride, 4u);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse("grid.m = 4\n"), ConfigError);
  EXPECT_THROW(parse("grid.n 64\n"), ConfigError);
  EXPECT_THROW(parse("grid.n = sixty\n"), ConfigError);
  EXPECT_THROW(parse("grid.n = 64.5\n"), ConfigError);
  EXPECT_THROW(parse("grid.n = -64\n"), ConfigError);
  EXPECT_THROW(parse("params.alpha = 0.5x\n"), ConfigError);
  EXPECT_THROW(parse("sweep.epsilon_list = 0.1,,0.05\n"), ConfigError);
  EXPECT_THROW(parse("stepper.adaptive = maybe\n"), ConfigError);
  EXPECT_THROW(parse("stepper.scheme = rk4\n"), ConfigError);
  EXPECT_NO_THROW(parse("stepper.scheme = strang_rk2\n"));
}

TEST(Config, ExperimentInvariants) {
  ExperimentConfig c;
  EXPECT_NO_THROW(validate_experiment(c, true));
  c.epsilon_list = {0.1, 0.1};
  EXPECT_THROW(validate_experiment(c, true), ConfigError);
  EXPECT_NO_THROW(validate_experiment(c, false));
  c.epsilon_list = {0.05, 0.1};
  EXPECT_THROW(validate_experiment(c, true), ConfigError);
  c.epsilon_list = {0.1, 0.0};
  EXPECT_THROW(validate_experiment(c, true), ConfigError);
  c = ExperimentConfig{};
  c.t_end = 0.0;
  EXPECT_THROW(validate_experiment(c, false), ConfigError);
  c = ExperimentConfig{};
  c.params.qbar = 1.5;
  EXPECT_THROW(validate_experiment(c, false), ConstraintViolation);
  c = ExperimentConfig{};
  c.n = 17;
  EXPECT_THROW(validate_experiment(c, false), ConfigError);
}

TEST(Config, EnvironmentOverridesOutputDirectory) {
  ExperimentConfig c;
  c.output_dir = "from-config";
  ::setenv(kOutputDirEnv, "from-env", 1);
  apply_environment(c);
  EXPECT_EQ(c.output_dir, "from-env");
  ::setenv(kOutputDirEnv, "", 1);
  c.output_dir = "kept";
  apply_environment(c);
  EXPECT_EQ(c.output_dir, "kept");
  ::unsetenv(kOutputDirEnv);
}

TEST(Csv, SeventeenSignificantDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = format_number(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_number(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(format_number(std::optional<double>{}), "");
}

TEST(Csv, SeriesRowMatchesHeader) {
  DiagnosticsRecord r;
  r.time = 0.5;
  auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(count(series_row(r)), count(kSeriesHeader));
  r.qplus_l2_sq_over_eps = 1.0;
  EXPECT_EQ(count(series_row(r)), count(kSeriesHeader));
  EXPECT_NE(series_row(r).find(",1.0000000000000000e+00,"), std::string::npos);
}

class CheckpointTest : public ::testing::Test {
protected:
  Grid g{16, 3.0};
  ModelParams p{.alpha = 0.25, .qbar = 0.6, .epsilon = 0.02, .qhat = 1.5, .mu = 0.7, .eta = 0.1};

  State random_state() {
    State s(g);
    s.u = VectorField(test::random_samples(g, 1), test::random_samples(g, 2));
    s.v = VectorField(test::random_samples(g, 3), test::random_samples(g, 4));
    s.T_e = test::random_samples(g, 5);
    s.q_e = test::random_samples(g, 6);
    s.time = 0.123456789;
    return s;
  }
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  const State s = random_state();
  const auto path = std::filesystem::temp_directory_path() / "mtrx_ckpt_roundtrip.ckpt";
  checkpoint_write(s, p, path);
  const Checkpoint c = checkpoint_read(path);
  EXPECT_EQ(c.state, s);
  EXPECT_EQ(c.params, p);
  EXPECT_EQ(std::filesystem::file_size(path), kCheckpointHeaderSize + 6 * 8 * g.size() + 4);
  const CheckpointSummary sum = checkpoint_inspect(path);
  EXPECT_TRUE(sum.crc_ok);
  EXPECT_EQ(sum.header.n, 16u);
  EXPECT_EQ(sum.header.time, s.time);
  std::filesystem::remove(path);
}

TEST_F(CheckpointTest, HeaderLayout) {
  const auto bytes = encode_checkpoint(random_state(), p);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MTRX");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 16);
  double length;
  std::memcpy(&length, &bytes[12], 8);
  EXPECT_EQ(length, 3.0);
}

TEST_F(CheckpointTest, CorruptionIsDetected) {
  const auto good = encode_checkpoint(random_state(), p);
  auto payload = good;
  payload[200] ^= 0x01;
  EXPECT_THROW(decode_checkpoint(payload), FormatError);
  auto crc = good;
  crc.back() ^= 0xff;
  EXPECT_THROW(decode_checkpoint(crc), FormatError);
  auto magic = good;
  magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), FormatError);
  auto truncated = good;
  truncated.resize(good.size() - 9);
  EXPECT_THROW(decode_checkpoint(truncated), FormatError);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(decode_checkpoint(trailing), FormatError);
  EXPECT_THROW(decode_checkpoint(std::vector<unsigned char>(10)), FormatError);
}

TEST_F(CheckpointTest, VersionBumpIsUnsupported) {
  auto bytes = encode_checkpoint(random_state(), p);
  bytes[4] = 2;
  EXPECT_THROW(decode_checkpoint(bytes), UnsupportedVersion);
}

TEST(Initial, TaylorGreenZeroAmplitudeIsZeroState) {
  const Grid g(32, 2.0 * test::kPi);
  SpectralEngine engine(g);
  InitialSpec spec;
  spec.family = "taylor-green";
  spec.u_amplitude = 0.0;
  EXPECT_EQ(make_initial_state(engine, spec), State(g));
}

TEST(Initial, MoistBlobIsFeasibleAndSolenoidal) {
  const Grid g(64, 16.0 * test::kPi);
  SpectralEngine engine(g);
  InitialSpec spec;
  spec.require_nonpositive_qe = true;
  const State s = make_initial_state(engine, spec);
  EXPECT_LE(s.q_e.max(), 0.0);
  EXPECT_LE(engine.div(s.u).max_abs(), 1e-10);
  EXPECT_GT(s.v.x.max_abs(), 0.0);
  EXPECT_GT(s.T_e.max(), 0.0);
}

TEST(Initial, RandomSmoothIsSeeded) {
  const Grid g(32, 2.0 * test::kPi);
  SpectralEngine engine(g);
  InitialSpec spec;
  spec.family = "random-smooth";
  spec.seed = 99;
  EXPECT_EQ(make_initial_state(engine, spec), make_initial_state(engine, spec));
  InitialSpec other = spec;
  other.seed = 100;
  EXPECT_NE(make_initial_state(engine, spec), make_initial_state(engine, other));
  spec.require_nonpositive_qe = true;
  const State s = make_initial_state(engine, spec);
  EXPECT_LE(s.q_e.max(), 0.0);
  EXPECT_LE(engine.div(s.u).max_abs(), 1e-10);
}

TEST(Initial, Errors) {
  const Grid g(32, 2.0 * test::kPi);
  SpectralEngine engine(g);
  InitialSpec spec;
  spec.family = "hurricane";
  EXPECT_THROW(make_initial_state(engine, spec), ConfigError);
  spec.family = "moist-blob";
  spec.width = 0.0;
  EXPECT_THROW(make_initial_state(engine, spec), ConfigError);
}

TEST(LogLogFit, RecoversPowerLaw) {
  const std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.5));
  const auto fit = fit_loglog(x, y);
  ASSERT_TRUE(fit);
  EXPECT_NEAR(fit->slope, 0.5, 1e-12);
  EXPECT_NEAR(std::exp(fit->intercept), 3.0, 1e-12);
  EXPECT_NEAR(fit->residual, 0.0, 1e-12);
  EXPECT_FALSE(fit_loglog({0.1}, {1.0}));
  EXPECT_FALSE(fit_loglog({0.1, 0.1}, {1.0, 2.0}));
  EXPECT_FALSE(fit_loglog({0.1, 0.05}, {1.0, 0.0}));
}

ExperimentConfig small_sweep() {
  ExperimentConfig c;
  c.n = 32;
  c.t_end = 0.2;
  c.stepper.dt = 0.01;
  c.record_stride = 2;
  c.initial.q_amplitude = 0.1;
  c.epsilon_list = {0.1, 0.05, 0.025};
  return c;
}

TEST(Sweep, RowsOrderedAndTrendDecreasing) {
  const RateReport r = epsilon_sweep(small_sweep(), 2);
  ASSERT_EQ(r.rows.size(), 3u);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_TRUE(r.rows[i].ok) << r.rows[i].error;
    if (i) {
      EXPECT_LT(r.rows[i].epsilon, r.rows[i - 1].epsilon);
      EXPECT_LE(r.rows[i].sup_distance, 1.05 * r.rows[i - 1].sup_distance);
    }
  }
  ASSERT_TRUE(r.distance_fit);
  EXPECT_TRUE(std::isfinite(r.distance_fit->slope));
  EXPECT_LE(r.limit_max_qe, 1e-14 * r.limit_qe_scale);
}

TEST(Sweep, DeterministicAcrossJobCounts) {
  const ExperimentConfig c = small_sweep();
  const std::string a = rates_csv(epsilon_sweep(c, 1));
  EXPECT_EQ(a, rates_csv(epsilon_sweep(c, 3)));
  EXPECT_EQ(a.substr(0, a.find('\n')), kRatesHeader);
}

TEST(Sweep, SingleEpsilonHasUndefinedSlope) {
  ExperimentConfig c = small_sweep();
  c.epsilon_list = {0.05};
  const RateReport r = epsilon_sweep(c);
  EXPECT_FALSE(r.distance_fit);
  EXPECT_NE(rates_summary(r).find("distance_slope = undefined"), std::string::npos);
}

TEST(Sweep, FailedRunsAreMarked) {
  ExperimentConfig c = small_sweep();
  const RateRow row = detail::sweep_row(c, 0.05, {});
  EXPECT_FALSE(row.ok);
  EXPECT_FALSE(row.error.empty());
  RateReport r;
  r.rows = {row};
  EXPECT_NE(rates_csv(r).find("failed,,,,"), std::string::npos);
}

TEST(Sweep, RequiresNonPositiveInitialMoisture) {
  ExperimentConfig c = small_sweep();
  c.initial.family = "random-smooth";
  EXPECT_NO_THROW(epsilon_sweep(c));  // the random family shifts q_e down
  c.epsilon_list = {0.1, 0.2};
  EXPECT_THROW(epsilon_sweep(c), ConfigError);
}

TEST(Probe, ZeroPerturbationIsIdentity) {
  const Grid g(32, 16.0 * test::kPi);
  SpectralEngine engine(g);
  const State s = make_initial_state(engine, InitialSpec{});
  EXPECT_EQ(perturb(s, probe_perturbation(engine), 0.0), s);
}

TEST(Probe, MoisturePerturbationKeepsFeasibility) {
  const Grid g(32, 16.0 * test::kPi);
  SpectralEngine engine(g);
  const State s = make_initial_state(engine, InitialSpec{});
  State dir(g);
  dir.q_e = probe_perturbation(engine).q_e;
  EXPECT_LE(dir.q_e.max(), 0.0);
  EXPECT_LE(perturb(s, dir, 0.3).q_e.max(), 0.0);
}

TEST(Probe, AmplificationFiniteAndStable) {
  ExperimentConfig c = small_sweep();
  const ProbeReport r = continuous_dependence_probe(c, {1e-2, 1e-3, 1e-4});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_TRUE(r.finite());
  EXPECT_LT(r.spread(), 2.0);
  for (const auto& row : r.rows) EXPECT_GE(row.amplification, 1.0);
  EXPECT_THROW(continuous_dependence_probe(c, {0.0}), ConfigError);
  EXPECT_THROW(continuous_dependence_probe(c, {}), ConfigError);
}

TEST(Validation, QuickSuitePassesAndIsDeterministic) {
  const ValidationReport a = validation_suite(ValidationLevel::quick);
  EXPECT_TRUE(a.passed()) << a.to_text();
  EXPECT_EQ(a.to_text(), validation_suite(ValidationLevel::quick).to_text());
}

} // namespace
} // namespace mtrx
