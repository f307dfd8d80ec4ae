//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "qfipmp/optimize.hpp"

namespace qfipmp::cli {

namespace {

constexpr ChannelKind kChannels[] = {ChannelKind::None, ChannelKind::Depolarization,
                                     ChannelKind::Dephasing, ChannelKind::Flipping};

Model make_model(ChannelKind kind) {
  ModelSpec spec;
  spec.channel = {kind, kind == ChannelKind::None ? 0.0 : 1.5};
  return Model(spec);
}

ControlProtocol random_protocol(std::mt19937_64& rng, double duration, int segments,
                                double amplitude) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  ControlProtocol p = ControlProtocol::constant(duration, segments, 0.0);
  for (double& v : p.values) v = u(rng);
  return p;
}

CheckOutcome below(std::string name, ChannelKind kind, double value, double tolerance) {
  return {std::move(name), std::string(to_string(kind)), value, tolerance,
          std::isfinite(value) && value < tolerance};
}

double gradient_error(const Model& truth, const Model& adjoint, const ControlProtocol& p,
                      const Operator& rho0) {
  const int substeps = default_substeps(p.duration, p.segments());
  const SwitchingProfile profile = evaluate_switching(adjoint, p, rho0, {}, substeps);
  const double dt = p.segment_length();
  double err = 0.0;
  double scale = 0.0;
  for (int k = 0; k < p.segments(); ++k) {
    const double h = 1e-4;
    ControlProtocol up = p;
    ControlProtocol down = p;
    up.values[static_cast<std::size_t>(k)] += h;
    down.values[static_cast<std::size_t>(k)] -= h;
    const double fd = -(evaluate_fisher(truth, up, rho0, {}, substeps) -
                        evaluate_fisher(truth, down, rho0, {}, substeps)) /
                      (2.0 * h);
    err = std::max(err, std::abs(profile.phi[static_cast<std::size_t>(k)] * dt - fd));
    scale = std::max(scale, std::abs(fd));
  }
  return err / scale;
}

// Exact propagation for the noiseless model: rho(T) from products of
// exp(-i H_k dt), rho_omega by a central difference in omega.
double unitary_mismatch(const ControlProtocol& p, const Operator& rho0) {
  auto exact = [&](double omega) {
    ModelSpec spec;
    spec.omega = omega;
    const Model m(spec);
    Operator rho = rho0;
    for (double u : p.values) {
      const Operator step = unitary_evolution(m.hamiltonian(u), p.segment_length());
      rho = step * rho * step.adjoint();
    }
    return rho;
  };
  const double h = 1e-5;
  const Operator rho = exact(0.0);
  const Operator rho_omega = (exact(h) - exact(-h)) / (2.0 * h);
  const Model m(ModelSpec{});
  const AugmentedState x =
      propagate_forward(m, p, rho0, default_substeps(p.duration, p.segments())).terminal();
  return std::max((x.rho - rho).cwiseAbs().maxCoeff(),
                  (x.rho_omega - rho_omega).cwiseAbs().maxCoeff());
}

}  // namespace

std::vector<CheckOutcome> run_check_suite(const CheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<CheckOutcome> out;
  const Operator rho0 = coherent_x_state(2);

  for (ChannelKind kind : kChannels) {
    const Model model = make_model(kind);
    const Model adjoint =
        options.inject_sign_error ? model.with_costate_channel_sign(+1.0) : model;

    double grad = 0.0;
    for (int trial = 0; trial < 2; ++trial) {
      grad = std::max(grad, gradient_error(model, adjoint, random_protocol(rng, 1.0, 20, 10.0),
                                           rho0));
    }
    out.push_back(below("gradient_identity", kind, grad, 1e-4));

    // Constant control: H_oc is conserved and equals dC/dT.
    std::uniform_real_distribution<double> amp(-5.0, 5.0);
    const double u = amp(rng);
    const int m = 10;
    const ControlProtocol constant = ControlProtocol::constant(1.0, m, u);
    const int substeps = default_substeps(1.0, m);
    const PmpDiagnostics diag = compute_diagnostics(adjoint, constant, rho0, {}, substeps);
    const auto [lo, hi] = std::minmax_element(diag.hoc.begin(), diag.hoc.end());
    const double mean = 0.5 * (*lo + *hi);
    out.push_back(
        below("hoc_flatness", kind, (*hi - *lo) / std::max(std::abs(mean), 1e-8), 1e-6));
    const double dT = 1e-4;
    auto cost_at = [&](double duration) {
      return -evaluate_fisher(model, ControlProtocol::constant(duration, m, u), rho0, {},
                              substeps);
    };
    const double dcdt = (cost_at(1.0 + dT) - cost_at(1.0 - dT)) / (2.0 * dT);
    out.push_back(below("hoc_vs_dCdT", kind,
                        std::abs(mean - dcdt) / std::max(std::abs(dcdt), 1e-8), 1e-3));

    const ControlProtocol p = random_protocol(rng, 1.0, 10, 8.0);
    const PositivityReport pos =
        monitor_trajectory(propagate_forward(model, p, rho0, default_substeps(1.0, 10)));
    out.push_back(below("trace_error", kind, pos.max_trace_error, 1e-9));
    out.push_back(below("rho_omega_trace", kind, pos.max_rho_omega_trace, 1e-9));
    out.push_back(below("hermiticity", kind, pos.max_hermitian_residual, 1e-9));
    out.push_back(below("negative_eigenvalue", kind, std::max(0.0, -pos.min_eigenvalue), 1e-7));

    const AugmentedState end =
        propagate_forward(model, p, rho0, default_substeps(1.0, 10)).terminal();
    const double q = qfi(end.rho, end.rho_omega);
    double excess = 0.0;
    for (double phi : {0.05, 0.3, 0.7, 1.2}) {
      excess = std::max(excess, cfi(end.rho, end.rho_omega, phi) - q);
    }
    out.push_back(below("cfi_le_qfi", kind, std::max(0.0, excess), 1e-9));

    OptimizerConfig cfg;
    cfg.max_iters = 5;
    cfg.restarts = 2;
    cfg.seed = options.seed;
    const OptimizationResult opt = optimize_protocol(model, 1.0, 10, cfg, rho0);
    const double uncontrolled = evaluate_fisher(model, ControlProtocol::constant(1.0, 10, 0.0),
                                                rho0, {}, default_substeps(1.0, 10));
    out.push_back(below("controlled_ge_uncontrolled", kind,
                        std::max(0.0, uncontrolled - opt.fisher), 1e-9));
  }

  {
    // RK4 error should drop by 2^4 per halving of the step.
    const Model model = make_model(ChannelKind::Flipping);
    const ControlProtocol p = random_protocol(rng, 1.0, 5, 8.0);
    const double f1 = evaluate_fisher(model, p, rho0, {}, 4);
    const double f2 = evaluate_fisher(model, p, rho0, {}, 8);
    const double f4 = evaluate_fisher(model, p, rho0, {}, 16);
    const double order = std::log2(std::abs(f1 - f2) / std::abs(f2 - f4));
    out.push_back({"step_halving_order", "flipping", order, 3.5, order > 3.5 && order < 4.5});
  }

  out.push_back(below("unitary_equivalence", ChannelKind::None,
                      unitary_mismatch(random_protocol(rng, 1.0, 10, 8.0), rho0), 1e-8));

  {
    const Model model = make_model(ChannelKind::Flipping);
    const Model adjoint =
        options.inject_sign_error ? model.with_costate_channel_sign(+1.0) : model;
    const ControlProtocol p = random_protocol(rng, 1.0, 10, 5.0);
    const int substeps = default_substeps(1.0, 10);
    const SwitchingProfile prof = evaluate_switching(adjoint, p, rho0, {}, substeps);
    double worst = 0.0;
    for (std::size_t k = 0; k < 10; k += 3) {
      const AugmentedState x = prof.forward.at(k);
      const CostatePair c = prof.costate.at(k);
      const SecondOrder a = second_order_analytic(adjoint, c, x);
      const SecondOrder b = second_order_bruteforce(adjoint, c, x, p.values[k],
                                                    {2e-3, 1e-3 * 10.0});
      const double scale = 1.0 + std::abs(a.gfg) + std::abs(a.ffg) / 10.0;
      worst = std::max({worst, std::abs(a.gfg - b.gfg) / scale,
                        std::abs(a.ffg - b.ffg) / (10.0 * scale)});
    }
    out.push_back(below("second_order_consistency", ChannelKind::Flipping, worst, 1e-4));
  }

  {
    // Noiseless optimum: the singular arc satisfies <[g,[f,g]]> <= 0.
    const Model model = make_model(ChannelKind::None);
    OptimizerConfig cfg;
    cfg.max_iters = 60;
    cfg.restarts = 1;
    const OptimizationResult opt = optimize_protocol(model, 0.5, 20, cfg, rho0);
    const double worst = *std::max_element(opt.diagnostics.gfg.begin(), opt.diagnostics.gfg.end());
    out.push_back(below("legendre_clebsch", ChannelKind::None, std::max(0.0, worst), 1e-12));
  }
  return out;
}

void print_check_table(std::ostream& out, const std::vector<CheckOutcome>& outcomes) {
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %-15s %-12s %-12s %s\n", "check", "channel", "value",
                "tolerance", "result");
  out << line;
  for (const CheckOutcome& c : outcomes) {
    std::snprintf(line, sizeof line, "%-28s %-15s %-12.4g %-12.4g %s\n", c.name.c_str(),
                  c.channel.c_str(), c.value, c.tolerance, c.passed ? "PASS" : "FAIL");
    out << line;
  }
}

}  // namespace qfipmp::cli
