// SPDX-License-Identifier: Apache-2.0
// Command-line front end: run, sweep, probe, validate, inspect.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mtrx/checkpoint.hpp"
#include "mtrx/config.hpp"
#include "mtrx/csv.hpp"
#include "mtrx/experiments.hpp"
#include "mtrx/stepper.hpp"

namespace {

enum Exit : int { kOk = 0, kValidationFailure = 1, kConfigError = 2, kBlowUp = 3 };

mtrx::ExperimentConfig load(const std::string& path) {
  mtrx::ExperimentConfig cfg = path.empty() ? mtrx::ExperimentConfig{} : mtrx::load_config(path);
  mtrx::apply_environment(cfg);
  return cfg;
}

int cmd_run(const std::string& config, const std::string& out, std::optional<double> t_end,
            std::optional<double> dt, std::optional<double> epsilon) {
  mtrx::ExperimentConfig cfg = load(config);
  if (!out.empty()) cfg.output_dir = out;
  if (t_end) cfg.t_end = *t_end;
  if (dt) {
    cfg.stepper.dt = *dt;
    cfg.stepper.min_dt = std::min(cfg.stepper.min_dt, *dt);
  }
  if (epsilon) cfg.params.epsilon = *epsilon;
  mtrx::validate_experiment(cfg, false);

  mtrx::SpectralEngine engine(cfg.grid());
  const mtrx::State s0 = mtrx::make_initial_state(engine, cfg.initial);
  std::filesystem::create_directories(cfg.output_dir);
  mtrx::SeriesWriter series(cfg.output_dir / "series.csv");
  mtrx::RunOptions opts;
  opts.record_stride = cfg.record_stride;
  opts.checkpoint_dir = cfg.output_dir;
  opts.observer = [&](const mtrx::State&, const mtrx::DiagnosticsRecord& r) { series.write(r); };
  const mtrx::State final_state = mtrx::run(engine, s0, cfg.params, cfg.stepper, cfg.t_end, opts);
  const auto ckpt = cfg.output_dir / mtrx::checkpoint_name(final_state.time);
  mtrx::checkpoint_write(final_state, cfg.params, ckpt);
  std::cout << "run finished at t = " << final_state.time << "\n"
            << "series: " << (cfg.output_dir / "series.csv").string() << "\n"
            << "checkpoint: " << ckpt.string() << "\n";
  return kOk;
}

int cmd_sweep(const std::string& config, const std::string& out, unsigned jobs) {
  mtrx::ExperimentConfig cfg = load(config);
  if (!out.empty()) cfg.output_dir = out;
  const mtrx::RateReport report = mtrx::epsilon_sweep(cfg, jobs);
  mtrx::write_rate_report(report, cfg.output_dir);
  std::cout << mtrx::rates_summary(report);
  for (const auto& row : report.rows)
    if (!row.ok) return kBlowUp;
  return kOk;
}

int cmd_probe(const std::string& config, const std::vector<double>& deltas) {
  mtrx::ExperimentConfig cfg = load(config);
  const mtrx::ProbeReport report =
      mtrx::continuous_dependence_probe(cfg, deltas.empty() ? cfg.probe_deltas : deltas);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string csv = mtrx::probe_csv(report);
  mtrx::write_text_file(cfg.output_dir / "probe.csv", csv);
  std::cout << csv << "amplification spread = " << mtrx::format_number(report.spread()) << "\n";
  return report.finite() && report.spread() < 2.0 ? kOk : kValidationFailure;
}

int cmd_validate(const std::string& level) {
  const auto report =
      mtrx::validation_suite(level == "full" ? mtrx::ValidationLevel::full : mtrx::ValidationLevel::quick);
  std::cout << report.to_text();
  return report.passed() ? kOk : kValidationFailure;
}

int cmd_inspect(const std::string& path) {
  const mtrx::CheckpointSummary s = mtrx::checkpoint_inspect(path);
  const auto& h = s.header;
  std::cout << "file: " << path << "\n"
            << "size: " << s.file_size << " bytes\n"
            << "version: " << h.version << "\n"
            << "n: " << h.n << "\n"
            << "length: " << mtrx::format_number(h.length) << "\n"
            << "alpha: " << mtrx::format_number(h.params.alpha) << "\n"
            << "qbar: " << mtrx::format_number(h.params.qbar) << "\n"
            << "epsilon: " << mtrx::format_number(h.params.epsilon) << "\n"
            << "qhat: " << mtrx::format_number(h.params.qhat) << "\n"
            << "mu: " << mtrx::format_number(h.params.mu) << "\n"
            << "eta: " << mtrx::format_number(h.params.eta) << "\n"
            << "time: " << mtrx::format_number(h.time) << "\n"
            << "crc: " << (s.crc_ok ? "ok" : "MISMATCH") << "\n";
  return s.crc_ok ? kOk : kValidationFailure;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtrx: moist barotropic/baroclinic relaxation model"};
  app.require_subcommand(1);

  std::string config, out, level = "quick", ckpt;
  std::optional<double> t_end, dt, epsilon;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<double> deltas;

  auto* run = app.add_subcommand("run", "single simulation");
  run->add_option("--config", config, "config file")->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_option("--t-end", t_end, "final time");
  run->add_option("--dt", dt, "base time step");
  run->add_option("--epsilon", epsilon, "relaxation time (0 selects the limiting system)");

  auto* sweep = app.add_subcommand("sweep", "epsilon convergence study");
  sweep->add_option("--config", config, "config file")->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);

  auto* probe = app.add_subcommand("probe", "continuous-dependence probe");
  probe->add_option("--config", config, "config file")->check(CLI::ExistingFile);
  probe->add_option("--delta", deltas, "perturbation scales")->delimiter(',');

  auto* validate = app.add_subcommand("validate", "analytic regression checks");
  validate->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));

  auto* inspect = app.add_subcommand("inspect", "print a checkpoint header");
  inspect->add_option("checkpoint", ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out, t_end, dt, epsilon);
    if (*sweep) return cmd_sweep(config, out, jobs);
    if (*probe) return cmd_probe(config, deltas);
    if (*validate) return cmd_validate(level);
    if (*inspect) return cmd_inspect(ckpt);
  } catch (const mtrx::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mtrx::ConstraintViolation& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mtrx::FormatError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const mtrx::BlowUp& e) {
    std::cerr << "blow-up in " << e.term() << " at t = " << e.time() << "\n";
    return kBlowUp;
  } catch (const mtrx::Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kBlowUp;
  }
  return kOk;
}
