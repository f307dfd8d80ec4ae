//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "checks.hpp"
#include "config.hpp"

namespace qfipmp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitCheckFailed = 4,
};

std::string version_string();

/// trajectory.csv and summary.json for the configured control.
void cmd_simulate(const ExperimentConfig& config, std::ostream& log);

/// control.csv and summary.json for the optimized protocol.
void cmd_optimize(const ExperimentConfig& config, std::ostream& log);

/// scan.csv and summary.json over run.T_list.
void cmd_scan(const ExperimentConfig& config, std::ostream& log);

/// Prints the check table; returns false if any check failed.
bool cmd_check(const CheckOptions& options, std::ostream& log);

/// Full command line: subcommand, --config, --out, --seed, --threads.
/// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfipmp::cli
