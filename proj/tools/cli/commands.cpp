//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>

#include "output.hpp"

#ifndef QFIPMP_VERSION_STRING
#define QFIPMP_VERSION_STRING "unknown"
#endif

namespace qfipmp::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

bool wants(const ExperimentConfig& c, const char* format) {
  return std::find(c.output.formats.begin(), c.output.formats.end(), format) !=
         c.output.formats.end();
}

std::ofstream open_output(const ExperimentConfig& c, const std::string& name) {
  fs::create_directories(c.output.directory);
  const fs::path path = fs::path(c.output.directory) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_summary(const ExperimentConfig& c, json summary,
                   std::chrono::steady_clock::time_point start) {
  if (!wants(c, "json")) return;
  summary["config"] = serialize_config(c);
  summary["version"] = version_string();
  summary["duration_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out = open_output(c, "summary.json");
  out << summary.dump(2) << "\n";
}

json restart_json(const std::vector<RestartSummary>& restarts) {
  json list = json::array();
  for (const RestartSummary& r : restarts) {
    json item = {{"init", r.init},           {"fisher", r.fisher},
                 {"iterations", r.iterations}, {"converged", r.converged},
                 {"failed", r.failed}};
    if (r.failed) item["error"] = r.error;
    list.push_back(item);
  }
  return list;
}

json intervals_json(const std::vector<TimeInterval>& intervals) {
  json list = json::array();
  for (const TimeInterval& i : intervals) list.push_back({i.begin, i.end});
  return list;
}

const char* cost_name(const CostSpec& cost) { return cost.kind == CostKind::Cfi ? "cfi" : "qfi"; }

}  // namespace

std::string version_string() { return QFIPMP_VERSION_STRING; }

void cmd_simulate(const ExperimentConfig& c, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Model model(c.model);
  const ControlProtocol control = control_protocol(c);
  control.validate();
  const int substeps = c.run.substeps > 0 ? c.run.substeps
                                          : default_substeps(control.duration, control.segments());
  const AugmentedTrajectory traj = propagate_forward(model, control, initial_state(c), substeps);
  const PositivityReport pos = monitor_trajectory(traj);
  const AugmentedState end = traj.terminal();
  const double fisher = fisher_information(c.cost, end);

  if (wants(c, "csv")) {
    std::ofstream out = open_output(c, "trajectory.csv");
    write_trajectory_csv(out, serialize_config(c), model, control, traj);
  }
  write_summary(c,
                {{"command", "simulate"},
                 {"cost", cost_name(c.cost)},
                 {"qfi", qfi(end.rho, end.rho_omega)},
                 {"fisher", fisher},
                 {"min_eigenvalue", pos.min_eigenvalue},
                 {"max_trace_error", pos.max_trace_error}},
                start);
  log << "simulate: " << cost_name(c.cost) << "(T) = " << format_double(fisher) << "\n";
}

void cmd_optimize(const ExperimentConfig& c, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const Model model(c.model);
  const Operator rho0 = initial_state(c);
  OptimizerConfig cfg = optimizer_config(c);

  OptimizationResult result;
  if (c.optimizer.mode == OptimizerMode::Singular) {
    // Singular everywhere: no amplitude bound, gradient descent to a
    // stationary point, then the damped fixed-point iteration on u_sing.
    cfg.u_max = 0.0;
    const OptimizationResult warm = optimize_protocol(model, c.run.duration, c.run.segments, cfg, rho0);
    result = singular_self_consistency(model, warm.best, self_consistency_config(c), rho0);
    result.restarts = warm.restarts;
    result.initial_phi_max = warm.initial_phi_max;
    result.iterations += warm.iterations;
  } else {
    result = optimize_protocol(model, c.run.duration, c.run.segments, cfg, rho0);
    result.lc_intervals = check_legendre_clebsch(result.diagnostics.gfg, c.run.duration, 0.0);
  }

  double hoc_mean = 0.0;
  for (double h : result.diagnostics.hoc) hoc_mean += h / static_cast<double>(result.diagnostics.hoc.size());
  const double tol_phi = 1e-3 * result.initial_phi_max;
  const double tol_hoc = 1e-3 * std::abs(hoc_mean);
  const FirstOrderReport report = check_first_order(result.diagnostics, result.best, tol_phi, tol_hoc);

  if (wants(c, "csv")) {
    std::ofstream out = open_output(c, "control.csv");
    write_control_csv(out, serialize_config(c), result.best, result.diagnostics, report);
  }
  json summary = {
      {"command", "optimize"},
      {"mode", std::string(to_string(c.optimizer.mode))},
      {"cost", cost_name(c.cost)},
      {"qfi", result.fisher},
      {"iterations", result.iterations},
      {"converged", result.converged},
      {"restarts", restart_json(result.restarts)},
      {"violations", report.violations},
      {"segments",
       {{"bang", report.count(SegmentClass::BangPlus) + report.count(SegmentClass::BangMinus)},
        {"singular", report.count(SegmentClass::Singular)},
        {"violation", report.count(SegmentClass::Violation)}}},
      {"tol_phi", tol_phi},
      {"tol_hoc", tol_hoc},
      {"hoc_flat", report.hoc_flat},
      {"hoc_mean", report.hoc_mean},
      {"hoc_max_deviation", report.hoc_max_deviation},
      {"lc_violation_intervals", intervals_json(result.lc_intervals)},
  };
  if (c.optimizer.mode == OptimizerMode::Singular) {
    summary["diverged"] = result.diverged;
    summary["damping"] = result.damping;
  }
  write_summary(c, summary, start);
  log << "optimize: " << cost_name(c.cost) << "(T) = " << format_double(result.fisher)
      << ", iterations " << result.iterations << ", violations " << report.violations << "\n";
}

void cmd_scan(const ExperimentConfig& c, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  if (c.run.durations.empty()) throw ConfigError("scan needs run.T_list");
  const Model model(c.model);
  const std::vector<ScanRow> rows =
      scan_qfi_vs_T(model, c.run.durations, c.run.segments_per_time, optimizer_config(c),
                    initial_state(c));
  if (wants(c, "csv")) {
    std::ofstream out = open_output(c, "scan.csv");
    write_scan_csv(out, serialize_config(c), rows);
  }
  json points = json::array();
  int failures = 0;
  for (const ScanRow& row : rows) {
    json p = {{"T", row.duration}};
    if (row.error.empty()) {
      p["qfi_opt"] = row.qfi_opt;
      p["qfi_uncontrolled"] = row.qfi_uncontrolled;
      p["iterations"] = row.result.iterations;
    } else {
      p["error"] = row.error;
      ++failures;
    }
    points.push_back(p);
  }
  write_summary(c, {{"command", "scan"}, {"cost", cost_name(c.cost)}, {"points", points},
                    {"failures", failures}},
                start);
  log << "scan: " << rows.size() - static_cast<std::size_t>(failures) << " of " << rows.size()
      << " points\n";
}

bool cmd_check(const CheckOptions& options, std::ostream& log) {
  const std::vector<CheckOutcome> outcomes = run_check_suite(options);
  print_check_table(log, outcomes);
  const bool ok = std::all_of(outcomes.begin(), outcomes.end(),
                              [](const CheckOutcome& o) { return o.passed; });
  log << (ok ? "all checks passed" : "check suite FAILED") << "\n";
  return ok;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control of quantum Fisher information for twist-and-turn spins",
               "qfipmp"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool inject = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "YAML experiment config");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "RNG seed (overrides optimizer.seed)");
    sub->add_option("--threads", threads, "Worker threads (overrides optimizer.threads)")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Propagate a fixed control");
  CLI::App* optimize = app.add_subcommand("optimize", "Optimize the control protocol");
  CLI::App* scan = app.add_subcommand("scan", "Optimized and uncontrolled QFI over run.T_list");
  CLI::App* check = app.add_subcommand("check", "Run the oracle and invariant suite");
  add_common(simulate, true);
  add_common(optimize, true);
  add_common(scan, true);
  add_common(check, false);
  check->add_flag("--inject-sign-error", inject,
                  "Flip the channel sign in the costate equations (suite must fail)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ExperimentConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (out_dir) config.output.directory = *out_dir;
    if (seed) config.optimizer.seed = *seed;
    if (threads) config.optimizer.threads = *threads;

    if (simulate->parsed()) {
      cmd_simulate(config, out);
    } else if (optimize->parsed()) {
      cmd_optimize(config, out);
    } else if (scan->parsed()) {
      cmd_scan(config, out);
    } else {
      CheckOptions options;
      options.seed = seed.value_or(options.seed);
      options.inject_sign_error = inject;
      return cmd_check(options, out) ? kExitOk : kExitCheckFailed;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace qfipmp::cli
