//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <memory>
#include <vector>

#include "qfipmp/channels.hpp"
#include "qfipmp/operators.hpp"

namespace qfipmp {

struct ModelSpec {
  int n_spins = 2;
  double chi = 10.0;    // twist strength
  double omega = 0.0;   // estimated parameter, evaluation point
  ChannelSpec channel;

  bool operator==(const ModelSpec&) const = default;
};

/// Twist-and-turn model H(u) = chi Jz^2 + omega Jz + u Jx with a per-spin
/// decoherence channel. Operators are built once and shared read-only.
class Model {
 public:
  explicit Model(ModelSpec spec);

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] int n_spins() const { return spec_.n_spins; }
  [[nodiscard]] Eigen::Index dim() const { return spins_.dim; }
  [[nodiscard]] const SpinOperators& spins() const { return spins_; }

  /// chi Jz^2 + omega Jz
  [[nodiscard]] const Operator& drift() const { return drift_; }
  /// Jx
  [[nodiscard]] const Operator& control_operator() const { return spins_.jx; }
  /// dH/d(omega) = Jz
  [[nodiscard]] const Operator& parameter_generator() const { return spins_.jz; }
  [[nodiscard]] const Dissipator& dissipator() const { return dissipator_; }

  [[nodiscard]] Operator hamiltonian(double u) const;

  /// Sign with which the channel term enters the costate equations; -1 for
  /// the correct adjoint. Anything else only exists to build deliberately
  /// broken fixtures for the check suite.
  [[nodiscard]] double costate_channel_sign() const { return costate_channel_sign_; }
  [[nodiscard]] Model with_costate_channel_sign(double sign) const;

 private:
  ModelSpec spec_;
  SpinOperators spins_;
  Operator drift_;
  Dissipator dissipator_;
  double costate_channel_sign_ = -1.0;
};

/// Piecewise-constant control on M uniform segments of [0, T]. Segment k
/// covers [kT/M, (k+1)T/M). u_max == 0 means unconstrained.
struct ControlProtocol {
  double duration = 1.0;
  std::vector<double> values;
  double u_max = 0.0;

  [[nodiscard]] int segments() const { return static_cast<int>(values.size()); }
  [[nodiscard]] double segment_length() const { return duration / segments(); }
  [[nodiscard]] double segment_start(int k) const { return duration * k / segments(); }
  [[nodiscard]] double segment_midpoint(int k) const {
    return duration * (k + 0.5) / segments();
  }

  /// Throws std::invalid_argument for M == 0, T <= 0, negative u_max,
  /// non-finite values or amplitudes above u_max.
  void validate() const;

  static ControlProtocol constant(double duration, int segments, double value,
                                  double u_max = 0.0);
};

struct AugmentedState {
  Operator rho;
  Operator rho_omega;
};

struct CostatePair {
  Operator lambda;
  Operator lambda_omega;
};

struct AugmentedTrajectory {
  std::vector<double> times;  // M + 1 segment boundaries
  std::vector<Operator> rho;
  std::vector<Operator> rho_omega;

  [[nodiscard]] AugmentedState at(std::size_t k) const { return {rho[k], rho_omega[k]}; }
  [[nodiscard]] AugmentedState terminal() const { return at(rho.size() - 1); }
};

struct CostateTrajectory {
  std::vector<double> times;
  std::vector<Operator> lambda;
  std::vector<Operator> lambda_omega;

  [[nodiscard]] CostatePair at(std::size_t k) const { return {lambda[k], lambda_omega[k]}; }
};

/// Pure state projector on the top eigenvector of Jx; the first nonzero
/// amplitude is made real positive.
Operator coherent_x_state(int n_spins);

/// Projector on (|m_z = N/2> + |m_z = -N/2>)/sqrt(2).
Operator hl_state_density(int n_spins);

/// RK4 steps per control segment for step dt = min(1e-3, T/M/4), rounded up
/// to an even count (Simpson quadrature over the substep nodes needs it).
int default_substeps(double duration, int segments);

/// Right-hand side of the augmented master equation at control u.
AugmentedState state_velocity(const Model& model, double u, const AugmentedState& x);

/// Right-hand side of the costate equations at control u.
CostatePair costate_velocity(const Model& model, double u, const CostatePair& c);

namespace detail {
class StepKernel;
}

/// Classical RK4 on the matrix-valued ODEs with preallocated workspace.
/// Small systems (up to three spins) run on fixed-size matrices. One
/// instance per thread.
class Stepper {
 public:
  explicit Stepper(const Model& model);
  ~Stepper();
  Stepper(Stepper&&) noexcept;
  Stepper& operator=(Stepper&&) noexcept;

  void set_control(double u);
  [[nodiscard]] double control() const { return u_; }

  void advance_state(AugmentedState& x, double h);
  /// Negative h integrates backward in time.
  void advance_costate(CostatePair& c, double h);

 private:
  double u_ = 0.0;
  std::unique_ptr<detail::StepKernel> kernel_;
};

/// Integrates (rho, rho_omega) from rho(0) = rho0, rho_omega(0) = 0 with
/// `substeps` RK4 steps per segment; returns the states at segment
/// boundaries. Throws NumericalError on non-finite values.
AugmentedTrajectory propagate_forward(const Model& model, const ControlProtocol& control,
                                      const Operator& rho0, int substeps);

/// Integrates the costates from their values at T back to 0 on the same
/// grid as propagate_forward.
CostateTrajectory propagate_costate_backward(const Model& model, const ControlProtocol& control,
                                             const CostatePair& terminal, int substeps);

/// Advance x by `duration` under constant control u in RK4 steps of at most
/// max_step (the last step is shortened to land exactly).
AugmentedState evolve_state(const Model& model, double u, AugmentedState x, double duration,
                            double max_step);

/// Same for the costates; negative duration goes backward in time.
CostatePair evolve_costate(const Model& model, double u, CostatePair c, double duration,
                           double max_step);

struct PositivityReport {
  double min_eigenvalue = 0.0;
  double max_trace_error = 0.0;
  double max_rho_omega_trace = 0.0;
  double max_hermitian_residual = 0.0;
  bool warned = false;
};

/// Checks trace, Hermiticity and positivity along a trajectory. Positivity
/// is monitored only: eigenvalues below -1e-7 print a warning to std::clog.
PositivityReport monitor_trajectory(const AugmentedTrajectory& trajectory);

}  // namespace qfipmp
