//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qfipmp/dynamics.hpp"
#include "qfipmp/fisher.hpp"

namespace qfipmp {

/// Phi = -i Tr(lambda [Jx, rho]) - i Tr(lambda_w [Jx, rho_w]).
/// Throws NumericalError if the trace has an imaginary part above 1e-9
/// (relative to 1 + |Phi|).
double switching_function(const Model& model, const CostatePair& costate,
                          const AugmentedState& state);

/// H_oc = Tr(lambda d(rho)/dt) + Tr(lambda_w d(rho_w)/dt) at control u.
double control_hamiltonian(const Model& model, const CostatePair& costate,
                           const AugmentedState& state, double u);

/// Cost, gradient and trajectories of one control protocol.
struct SwitchingProfile {
  double fisher = 0.0;  // QFI or CFI at T; the cost is -fisher
  /// Segment-averaged switching function: phi[k] * T/M = dC/du_k.
  std::vector<double> phi;
  AugmentedTrajectory forward;
  CostateTrajectory costate;
};

/// Forward pass, terminal costate, then a backward sweep that recomputes the
/// forward substep states of each segment from its checkpoint and integrates
/// Phi over the segment with composite Simpson on the RK4 nodes. `substeps`
/// must be even.
SwitchingProfile evaluate_switching(const Model& model, const ControlProtocol& control,
                                    const Operator& rho0, const CostSpec& cost, int substeps);

/// Terminal Fisher information only (no costates).
double evaluate_fisher(const Model& model, const ControlProtocol& control, const Operator& rho0,
                       const CostSpec& cost, int substeps);

enum class SecondOrderMethod { AnalyticFlipping, BruteForce };

/// d^2 Phi / dt^2 = u * gfg + ffg on a constant-control stretch.
struct SecondOrder {
  double gfg = 0.0;  // <[g,[f,g]]>
  double ffg = 0.0;  // <[f,[f,g]]>
};

struct BruteForceSettings {
  double window = 2e-3;         // stencil spans [t - window/2, t + window/2]
  double control_offset = 1e-3; // u and u + offset
};

/// Closed form for H1 = Jx with no channel or the flipping channel, built
/// from A = [Jx,{Jz,Jy}], B = [Jz^2,{Jz,Jy}], E = [Jz,{Jz,Jy}] and the
/// damping correction with D = {Jz,Jy}. Requires omega == 0; throws
/// std::invalid_argument otherwise or for other channels.
SecondOrder second_order_analytic(const Model& model, const CostatePair& costate,
                                  const AugmentedState& state);

/// Channel-agnostic: evaluates Phi on a five-point stencil around the
/// snapshot under constant control u and u + offset, takes the second time
/// derivative of each and splits the affine dependence on u.
SecondOrder second_order_bruteforce(const Model& model, const CostatePair& costate,
                                    const AugmentedState& state, double u,
                                    const BruteForceSettings& settings);

SecondOrder second_order_quantities(const Model& model, const CostatePair& costate,
                                    const AugmentedState& state, double u,
                                    SecondOrderMethod method, const BruteForceSettings& settings);

/// -ffg / gfg, or nothing when |gfg| < 1e-8 (|ffg| + 1).
std::optional<double> singular_control(double gfg, double ffg);

/// Default method for a channel: analytic where it applies, brute force
/// otherwise.
SecondOrderMethod default_second_order_method(const Model& model);

struct PmpDiagnostics {
  std::vector<double> times;  // segment midpoints
  std::vector<double> phi;    // segment averages
  std::vector<double> hoc;    // at midpoints
  std::vector<double> gfg;
  std::vector<double> ffg;
  std::vector<std::optional<double>> u_sing;
  double fisher_T = 0.0;
  std::vector<int> lc_violations;  // segments with gfg > 0
};

PmpDiagnostics compute_diagnostics(const Model& model, const ControlProtocol& control,
                                   const Operator& rho0, const CostSpec& cost, int substeps,
                                   std::optional<SecondOrderMethod> method = std::nullopt);

enum class SegmentClass { BangPlus, BangMinus, Singular, Violation };

std::string_view to_string(SegmentClass c);

struct FirstOrderReport {
  std::vector<SegmentClass> classes;
  int violations = 0;
  double hoc_mean = 0.0;
  double hoc_max_deviation = 0.0;
  bool hoc_flat = true;  // hoc_max_deviation <= tol_hoc

  [[nodiscard]] int count(SegmentClass c) const;
};

/// Classifies each segment as bang+ (u = +u_max, Phi < 0), bang-
/// (u = -u_max, Phi > 0), singular (|Phi| < tol_phi) or violation.
FirstOrderReport check_first_order(const PmpDiagnostics& diagnostics,
                                   const ControlProtocol& control, double tol_phi,
                                   double tol_hoc);

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;
};

/// Maximal runs of consecutive segments with gfg > tol, as time intervals
/// on the uniform grid over [0, duration].
std::vector<TimeInterval> check_legendre_clebsch(std::span<const double> gfg, double duration,
                                                 double tol);

}  // namespace qfipmp
