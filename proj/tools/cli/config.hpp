//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfipmp/dynamics.hpp"
#include "qfipmp/fisher.hpp"
#include "qfipmp/optimize.hpp"

namespace qfipmp::cli {

/// Bad config text or values. The message starts with "line N:" whenever
/// the offending node has a position.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitialState { CoherentX, Hl };

enum class OptimizerMode { Gradient, Singular };

struct RunSection {
  double duration = 1.0;
  int segments = 50;
  int substeps = 0;                   // 0: default_substeps
  double u0 = 0.0;                    // constant control for simulate
  std::vector<double> control;        // explicit control values, overrides u0
  std::vector<double> durations;      // scan horizons
  double segments_per_time = 50.0;    // scan grid density
  InitialState initial_state = InitialState::CoherentX;

  bool operator==(const RunSection&) const = default;
};

struct OptimizerSection {
  OptimizerMode mode = OptimizerMode::Gradient;
  int max_iters = 500;
  double learning_rate = 4.0;
  double backtrack = 0.5;
  double tol_grad = 0.0;
  int restarts = 5;
  std::uint64_t seed = 1;
  double u_max = 0.0;
  int threads = 1;
  double alpha = 0.3;       // singular mode damping
  int singular_iters = 400;

  bool operator==(const OptimizerSection&) const = default;
};

struct OutputSection {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "json"};

  bool operator==(const OutputSection&) const = default;
};

struct ExperimentConfig {
  ModelSpec model;
  RunSection run;
  OptimizerSection optimizer;
  CostSpec cost;
  OutputSection output;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses YAML text. Unknown keys, wrong types and out-of-range values throw
/// ConfigError; missing keys keep their defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical YAML: every key in a fixed order, floats with 17 significant
/// digits. parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

OptimizerConfig optimizer_config(const ExperimentConfig& config);
SelfConsistencyConfig self_consistency_config(const ExperimentConfig& config);
Operator initial_state(const ExperimentConfig& config);
/// run.control if given, otherwise run.u0 on every segment.
ControlProtocol control_protocol(const ExperimentConfig& config);

std::string_view to_string(InitialState s);
std::string_view to_string(OptimizerMode m);

}  // namespace qfipmp::cli
