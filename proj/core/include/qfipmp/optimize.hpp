//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qfipmp/dynamics.hpp"
#include "qfipmp/fisher.hpp"
#include "qfipmp/pmp.hpp"

namespace qfipmp {

struct OptimizerConfig {
  int max_iters = 500;
  double learning_rate = 4.0;
  double backtrack = 0.5;
  /// Stop once max |Phi_k| over segments with an inactive bound drops below
  /// this. 0 selects 1e-5 times the value at the first iterate.
  double tol_grad = 0.0;
  int restarts = 5;
  std::uint64_t seed = 1;
  CostSpec cost;
  double u_max = 0.0;  // 0 means unconstrained
  int substeps = 0;    // RK4 steps per segment; 0 selects default_substeps
  int threads = 1;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;

  bool operator==(const OptimizerConfig&) const = default;
};

struct RestartSummary {
  std::string init;  // "zero", "half", "random"
  double fisher = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct OptimizationResult {
  ControlProtocol best;
  double fisher = 0.0;  // QFI or CFI(phi) at T, per cfg.cost
  std::vector<double> cost_history;  // -fisher per accepted iterate of the best run
  PmpDiagnostics diagnostics;
  std::vector<RestartSummary> restarts;
  int iterations = 0;
  bool converged = false;
  /// max |Phi_k| at the starting protocol of the reported run; the scale
  /// for "small Phi" when classifying segments.
  double initial_phi_max = 0.0;

  // Self-consistency mode only.
  bool diverged = false;
  double damping = 0.0;  // alpha of the reported run
  std::vector<TimeInterval> lc_intervals;
};

/// u_k <- clamp(u_k - eta Phi_k, -u_max, u_max); no clamp when u_max == 0.
ControlProtocol gradient_step(const ControlProtocol& u, const std::vector<double>& phi, double eta,
                              double u_max);

/// max |Phi_k| over segments whose bound is not pushing back on the step.
double projected_gradient_norm(const ControlProtocol& u, const std::vector<double>& phi);

/// Projected gradient descent with backtracking from the restart set
/// {0, u_eff/2, random...} with u_eff = u_max, or chi when unconstrained.
/// rho0 defaults to the coherent x state.
OptimizationResult optimize_protocol(const Model& model, double duration, int segments,
                                     const OptimizerConfig& cfg,
                                     const std::optional<Operator>& rho0 = std::nullopt);

/// Gradient descent from one given protocol (no restarts).
OptimizationResult descend_from(const Model& model, const ControlProtocol& start,
                                const OptimizerConfig& cfg, const Operator& rho0);

struct SelfConsistencyConfig {
  double alpha = 0.3;
  /// A run whose residual starts growing is restarted from u0 with half the
  /// damping, down to this floor.
  double min_alpha = 0.3 / 64;
  int max_iters = 400;
  /// Converged once the largest update is below tol * max(1, max |u|).
  double tol = 1e-7;
  double divergence_bound = 1e3;
  CostSpec cost;
  int substeps = 0;
};

/// Fixed point of u <- (1 - alpha) u + alpha u_sing with u_sing evaluated at
/// segment midpoints. Segments where u_sing is undefined keep their value.
/// If no damping down to min_alpha gives a stable run, the result carries the
/// last finite iterate of the final attempt and diverged = true. LC-violation
/// intervals are reported either way.
OptimizationResult singular_self_consistency(const Model& model, const ControlProtocol& u0,
                                             const SelfConsistencyConfig& cfg,
                                             const std::optional<Operator>& rho0 = std::nullopt);

struct ScanRow {
  double duration = 0.0;
  double qfi_opt = 0.0;
  double qfi_uncontrolled = 0.0;
  double hoc_at_opt = 0.0;               // mean over segment midpoints
  std::optional<double> asymptote;       // from the optimized terminal state
  std::string error;                     // non-empty if this point failed
  OptimizationResult result;
};

/// M = max(1, round(segments_per_time * T)) for each T. Failures are
/// recorded per row and do not stop the scan.
std::vector<ScanRow> scan_qfi_vs_T(const Model& model, const std::vector<double>& durations,
                                   double segments_per_time, const OptimizerConfig& cfg,
                                   const std::optional<Operator>& rho0 = std::nullopt);

}  // namespace qfipmp
