//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "qfipmp/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qfipmp {

namespace {

double real_checked(Complex value, const char* what) {
  if (std::abs(value.imag()) > 1e-9 * (1.0 + std::abs(value.real()))) {
    throw NumericalError(std::string(what) + " has imaginary part " +
                         std::to_string(value.imag()));
  }
  return value.real();
}

// -i Tr(lambda [K, rho])
Complex minus_i_trace_commutator(const Operator& lambda, const Operator& k, const Operator& rho) {
  return -kI * trace_product(lambda, commutator(k, rho));
}

}  // namespace

double switching_function(const Model& model, const CostatePair& costate,
                          const AugmentedState& state) {
  const Operator& h1 = model.control_operator();
  const Complex phi = minus_i_trace_commutator(costate.lambda, h1, state.rho) +
                      minus_i_trace_commutator(costate.lambda_omega, h1, state.rho_omega);
  return real_checked(phi, "switching function");
}

double control_hamiltonian(const Model& model, const CostatePair& costate,
                           const AugmentedState& state, double u) {
  const AugmentedState v = state_velocity(model, u, state);
  const Complex h = trace_product(costate.lambda, v.rho) +
                    trace_product(costate.lambda_omega, v.rho_omega);
  return real_checked(h, "control Hamiltonian");
}

SwitchingProfile evaluate_switching(const Model& model, const ControlProtocol& control,
                                    const Operator& rho0, const CostSpec& cost, int substeps) {
  if (substeps < 2 || substeps % 2 != 0) {
    throw std::invalid_argument("evaluate_switching needs an even substep count");
  }
  SwitchingProfile out;
  out.forward = propagate_forward(model, control, rho0, substeps);
  const AugmentedState terminal = out.forward.terminal();
  out.fisher = fisher_information(cost, terminal);
  CostatePair c = terminal_costate(cost, terminal);

  const int segments = control.segments();
  const auto count = static_cast<std::size_t>(segments) + 1;
  const double segment = control.segment_length();
  const double h = segment / substeps;

  out.phi.assign(static_cast<std::size_t>(segments), 0.0);
  out.costate.times = out.forward.times;
  out.costate.lambda.resize(count);
  out.costate.lambda_omega.resize(count);
  out.costate.lambda[count - 1] = c.lambda;
  out.costate.lambda_omega[count - 1] = c.lambda_omega;

  Stepper stepper(model);
  std::vector<AugmentedState> nodes(static_cast<std::size_t>(substeps) + 1);
  for (int k = segments - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    stepper.set_control(control.values[idx]);
    nodes[0] = out.forward.at(idx);
    for (int j = 1; j <= substeps; ++j) {
      nodes[static_cast<std::size_t>(j)] = nodes[static_cast<std::size_t>(j) - 1];
      stepper.advance_state(nodes[static_cast<std::size_t>(j)], h);
    }
    double integral = 0.0;
    for (int j = substeps; j >= 0; --j) {
      const double weight = (j == 0 || j == substeps) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      integral += weight * switching_function(model, c, nodes[static_cast<std::size_t>(j)]);
      if (j > 0) stepper.advance_costate(c, -h);
    }
    if (!c.lambda.allFinite() || !c.lambda_omega.allFinite()) {
      throw NumericalError("non-finite costate during backward sweep");
    }
    out.phi[idx] = integral * h / 3.0 / segment;
    out.costate.lambda[idx] = c.lambda;
    out.costate.lambda_omega[idx] = c.lambda_omega;
  }
  return out;
}

double evaluate_fisher(const Model& model, const ControlProtocol& control, const Operator& rho0,
                       const CostSpec& cost, int substeps) {
  const AugmentedTrajectory traj = propagate_forward(model, control, rho0, substeps);
  return fisher_information(cost, traj.terminal());
}

SecondOrder second_order_analytic(const Model& model, const CostatePair& costate,
                                  const AugmentedState& state) {
  const ChannelKind kind = model.spec().channel.kind;
  if (kind != ChannelKind::None && kind != ChannelKind::Flipping) {
    throw std::invalid_argument("analytic second-order quantities need no channel or flipping");
  }
  if (model.spec().omega != 0.0) {
    throw std::invalid_argument("analytic second-order quantities assume omega = 0");
  }
  const SpinOperators& s = model.spins();
  const double chi = model.spec().chi;
  const Operator d_op = anticommutator(s.jz, s.jy);
  const Operator a_op = commutator(s.jx, d_op);
  const Operator b_op = commutator(s.jz * s.jz, d_op);
  const Operator e_op = commutator(s.jz, d_op);
  const Operator e_shift = e_op - kI * anticommutator(s.jz, s.jx);

  const Operator& lam = costate.lambda;
  const Operator& lam_w = costate.lambda_omega;
  const Operator& rho = state.rho;
  const Operator& rho_w = state.rho_omega;
  auto tr = [](const Operator& x, const Operator& k, const Operator& y) {
    return trace_product(x, commutator(k, y));
  };

  const Complex gfg = -chi * tr(lam, a_op, rho) - chi * tr(lam_w, a_op, rho_w) -
                      kI * tr(lam_w, s.jz, rho);

  Complex damping = 0.0;
  const Dissipator& diss = model.dissipator();
  if (!diss.is_zero()) {
    const Operator d_lam = diss.apply(lam);
    const Operator d_lam_w = diss.apply(lam_w);
    const Operator d_rho = diss.apply(rho);
    const Operator d_rho_w = diss.apply(rho_w);
    damping = kI * (tr(d_lam_w, s.jy, rho) - tr(lam_w, s.jy, d_rho)) +
              kI * chi *
                  (tr(d_lam, d_op, rho) - tr(lam, d_op, d_rho) + tr(d_lam_w, d_op, rho_w) -
                   tr(lam_w, d_op, d_rho_w));
  }
  const Complex ffg = -(chi * chi * tr(lam, b_op, rho) + chi * chi * tr(lam_w, b_op, rho_w) +
                        chi * tr(lam_w, e_shift, rho)) -
                      damping;
  return {real_checked(gfg, "<[g,[f,g]]>"), real_checked(ffg, "<[f,[f,g]]>")};
}

namespace {

// Second time derivative of Phi under constant control u, five-point stencil
// with spacing `spacing` around the snapshot.
double phi_second_derivative(const Model& model, const CostatePair& costate,
                             const AugmentedState& state, double u, double spacing) {
  const double inner = spacing / 8.0;
  double values[5];
  values[2] = switching_function(model, costate, state);
  for (int dir : {-1, 1}) {
    AugmentedState x = state;
    CostatePair c = costate;
    for (int j = 1; j <= 2; ++j) {
      x = evolve_state(model, u, std::move(x), dir * spacing, inner);
      c = evolve_costate(model, u, std::move(c), dir * spacing, inner);
      values[2 + dir * j] = switching_function(model, c, x);
    }
  }
  return (-values[0] + 16.0 * values[1] - 30.0 * values[2] + 16.0 * values[3] - values[4]) /
         (12.0 * spacing * spacing);
}

}  // namespace

SecondOrder second_order_bruteforce(const Model& model, const CostatePair& costate,
                                    const AugmentedState& state, double u,
                                    const BruteForceSettings& settings) {
  if (!(settings.window > 0.0) || !(settings.control_offset > 0.0)) {
    throw std::invalid_argument("brute-force window and control offset must be positive");
  }
  const double spacing = settings.window / 4.0;
  const double offset = settings.control_offset;
  const double base = phi_second_derivative(model, costate, state, u, spacing);
  const double shifted = phi_second_derivative(model, costate, state, u + offset, spacing);
  const double gfg = (shifted - base) / offset;
  return {gfg, base - gfg * u};
}

SecondOrder second_order_quantities(const Model& model, const CostatePair& costate,
                                    const AugmentedState& state, double u,
                                    SecondOrderMethod method, const BruteForceSettings& settings) {
  return method == SecondOrderMethod::AnalyticFlipping
             ? second_order_analytic(model, costate, state)
             : second_order_bruteforce(model, costate, state, u, settings);
}

std::optional<double> singular_control(double gfg, double ffg) {
  if (std::abs(gfg) < 1e-8 * (std::abs(ffg) + 1.0)) return std::nullopt;
  return -ffg / gfg;
}

SecondOrderMethod default_second_order_method(const Model& model) {
  const ChannelKind kind = model.spec().channel.kind;
  const bool analytic =
      (kind == ChannelKind::None || kind == ChannelKind::Flipping) && model.spec().omega == 0.0;
  return analytic ? SecondOrderMethod::AnalyticFlipping : SecondOrderMethod::BruteForce;
}

PmpDiagnostics compute_diagnostics(const Model& model, const ControlProtocol& control,
                                   const Operator& rho0, const CostSpec& cost, int substeps,
                                   std::optional<SecondOrderMethod> method) {
  const SwitchingProfile profile = evaluate_switching(model, control, rho0, cost, substeps);
  const SecondOrderMethod how = method.value_or(default_second_order_method(model));
  const int segments = control.segments();
  const double segment = control.segment_length();
  const double h = segment / substeps;
  const BruteForceSettings brute{2.0 * h, 1e-3 * std::max(1.0, control.u_max)};

  PmpDiagnostics d;
  d.fisher_T = profile.fisher;
  d.phi = profile.phi;
  for (int k = 0; k < segments; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const double u = control.values[idx];
    const AugmentedState x = evolve_state(model, u, profile.forward.at(idx), 0.5 * segment, h);
    const CostatePair c = evolve_costate(model, u, profile.costate.at(idx + 1), -0.5 * segment, h);
    const SecondOrder so = second_order_quantities(model, c, x, u, how, brute);
    d.times.push_back(control.segment_midpoint(k));
    d.hoc.push_back(control_hamiltonian(model, c, x, u));
    d.gfg.push_back(so.gfg);
    d.ffg.push_back(so.ffg);
    d.u_sing.push_back(singular_control(so.gfg, so.ffg));
    if (so.gfg > 0.0) d.lc_violations.push_back(k);
  }
  return d;
}

std::string_view to_string(SegmentClass c) {
  switch (c) {
    case SegmentClass::BangPlus:
    case SegmentClass::BangMinus:
      return "bang";
    case SegmentClass::Singular:
      return "singular";
    case SegmentClass::Violation:
      return "violation";
  }
  return "violation";
}

int FirstOrderReport::count(SegmentClass c) const {
  return static_cast<int>(std::count(classes.begin(), classes.end(), c));
}

FirstOrderReport check_first_order(const PmpDiagnostics& diagnostics,
                                   const ControlProtocol& control, double tol_phi,
                                   double tol_hoc) {
  if (diagnostics.phi.size() != control.values.size()) {
    throw std::invalid_argument("diagnostics and control have different segment counts");
  }
  FirstOrderReport report;
  const double u_max = control.u_max;
  for (std::size_t k = 0; k < control.values.size(); ++k) {
    const double u = control.values[k];
    const double phi = diagnostics.phi[k];
    const bool at_upper = u_max > 0.0 && u >= u_max * (1.0 - 1e-12);
    const bool at_lower = u_max > 0.0 && u <= -u_max * (1.0 - 1e-12);
    SegmentClass c = SegmentClass::Violation;
    if (std::abs(phi) < tol_phi) {
      c = SegmentClass::Singular;
    } else if (at_upper && phi < 0.0) {
      c = SegmentClass::BangPlus;
    } else if (at_lower && phi > 0.0) {
      c = SegmentClass::BangMinus;
    }
    if (c == SegmentClass::Violation) ++report.violations;
    report.classes.push_back(c);
  }
  if (!diagnostics.hoc.empty()) {
    report.hoc_mean = std::accumulate(diagnostics.hoc.begin(), diagnostics.hoc.end(), 0.0) /
                      static_cast<double>(diagnostics.hoc.size());
    for (double h : diagnostics.hoc) {
      report.hoc_max_deviation = std::max(report.hoc_max_deviation, std::abs(h - report.hoc_mean));
    }
  }
  report.hoc_flat = report.hoc_max_deviation <= tol_hoc;
  return report;
}

std::vector<TimeInterval> check_legendre_clebsch(std::span<const double> gfg, double duration,
                                                 double tol) {
  std::vector<TimeInterval> intervals;
  const auto m = static_cast<double>(gfg.size());
  std::size_t k = 0;
  while (k < gfg.size()) {
    if (gfg[k] > tol) {
      const std::size_t start = k;
      while (k < gfg.size() && gfg[k] > tol) ++k;
      intervals.push_back({duration * static_cast<double>(start) / m,
                           duration * static_cast<double>(k) / m});
    } else {
      ++k;
    }
  }
  return intervals;
}

}  // namespace qfipmp
