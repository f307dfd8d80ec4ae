//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "qfipmp/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace qfipmp {

namespace {

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled by exactly one worker; callers write results into slot i.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

bool at_upper(double u, double u_max) { return u_max > 0.0 && u >= u_max * (1.0 - 1e-12); }
bool at_lower(double u, double u_max) { return u_max > 0.0 && u <= -u_max * (1.0 - 1e-12); }

int resolve_substeps(int requested, double duration, int segments) {
  if (requested == 0) return default_substeps(duration, segments);
  return requested % 2 == 0 ? requested : requested + 1;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("optimizer.max_iters must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("optimizer.learning_rate must be positive");
  }
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw std::invalid_argument("optimizer.backtrack must lie in (0, 1)");
  }
  if (!(tol_grad >= 0.0)) throw std::invalid_argument("optimizer.tol_grad must be >= 0");
  if (restarts < 1) throw std::invalid_argument("optimizer.restarts must be >= 1");
  if (!(u_max >= 0.0) || !std::isfinite(u_max)) {
    throw std::invalid_argument("optimizer.u_max must be >= 0");
  }
  if (substeps < 0) throw std::invalid_argument("run.substeps must be >= 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

ControlProtocol gradient_step(const ControlProtocol& u, const std::vector<double>& phi, double eta,
                              double u_max) {
  if (phi.size() != u.values.size()) {
    throw std::invalid_argument("gradient_step: Phi and control grids differ");
  }
  ControlProtocol out = u;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    double v = u.values[k] - eta * phi[k];
    if (u_max > 0.0) v = std::clamp(v, -u_max, u_max);
    out.values[k] = v;
  }
  return out;
}

double projected_gradient_norm(const ControlProtocol& u, const std::vector<double>& phi) {
  double norm = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double v = u.values[k];
    if (at_upper(v, u.u_max) && phi[k] <= 0.0) continue;
    if (at_lower(v, u.u_max) && phi[k] >= 0.0) continue;
    norm = std::max(norm, std::abs(phi[k]));
  }
  return norm;
}

OptimizationResult descend_from(const Model& model, const ControlProtocol& start,
                                const OptimizerConfig& cfg, const Operator& rho0) {
  cfg.validate();
  start.validate();
  const int substeps = resolve_substeps(cfg.substeps, start.duration, start.segments());

  OptimizationResult r;
  r.best = start;
  r.best.u_max = cfg.u_max;
  SwitchingProfile profile = evaluate_switching(model, r.best, rho0, cfg.cost, substeps);
  double cost = -profile.fisher;
  r.cost_history.push_back(cost);
  for (double p : profile.phi) r.initial_phi_max = std::max(r.initial_phi_max, std::abs(p));

  double tol = cfg.tol_grad;
  if (tol == 0.0) tol = 1e-5 * projected_gradient_norm(r.best, profile.phi);

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (projected_gradient_norm(r.best, profile.phi) <= tol) {
      r.converged = true;
      break;
    }
    double eta = cfg.learning_rate;
    bool accepted = false;
    ControlProtocol trial;
    for (int tries = 0; tries < 60; ++tries, eta *= cfg.backtrack) {
      trial = gradient_step(r.best, profile.phi, eta, cfg.u_max);
      if (trial.values == r.best.values) break;
      double f = 0.0;
      try {
        f = evaluate_fisher(model, trial, rho0, cfg.cost, substeps);
      } catch (const NumericalError&) {
        continue;
      }
      if (std::isfinite(f) && -f < cost) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent along the projected gradient at any step size: treat as
      // a stationary point at working precision.
      r.converged = true;
      break;
    }
    r.best = trial;
    profile = evaluate_switching(model, r.best, rho0, cfg.cost, substeps);
    cost = -profile.fisher;
    r.cost_history.push_back(cost);
    ++r.iterations;
  }
  r.fisher = profile.fisher;
  return r;
}

OptimizationResult optimize_protocol(const Model& model, double duration, int segments,
                                     const OptimizerConfig& cfg,
                                     const std::optional<Operator>& rho0) {
  cfg.validate();
  if (segments < 1) throw std::invalid_argument("segment count must be >= 1");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  const Operator initial = rho0.value_or(coherent_x_state(model.n_spins()));
  const double u_eff = cfg.u_max > 0.0 ? cfg.u_max : model.spec().chi;

  // All initial protocols are drawn up front so the result does not depend
  // on the scheduling of restarts across threads.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-u_eff, u_eff);
  std::vector<ControlProtocol> starts;
  std::vector<std::string> labels;
  for (int i = 0; i < cfg.restarts; ++i) {
    ControlProtocol p = ControlProtocol::constant(duration, segments, 0.0, cfg.u_max);
    if (i == 0) {
      labels.emplace_back("zero");
    } else if (i == 1) {
      std::fill(p.values.begin(), p.values.end(), 0.5 * u_eff);
      labels.emplace_back("half");
    } else {
      for (double& v : p.values) v = uniform(rng);
      labels.emplace_back("random");
    }
    starts.push_back(std::move(p));
  }

  std::vector<OptimizationResult> runs(starts.size());
  std::vector<RestartSummary> summaries(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
    RestartSummary& s = summaries[i];
    s.init = labels[i];
    try {
      runs[i] = descend_from(model, starts[i], cfg, initial);
      s.fisher = runs[i].fisher;
      s.iterations = runs[i].iterations;
      s.converged = runs[i].converged;
    } catch (const NumericalError& e) {
      s.failed = true;
      s.error = e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (summaries[i].failed) continue;
    if (!best || runs[i].fisher > runs[*best].fisher) best = i;
  }
  if (!best) throw NumericalError("every optimizer restart failed");

  OptimizationResult out = std::move(runs[*best]);
  out.restarts = std::move(summaries);
  const int substeps = resolve_substeps(cfg.substeps, duration, segments);
  out.diagnostics = compute_diagnostics(model, out.best, initial, cfg.cost, substeps);
  return out;
}

namespace {

// max |u_sing - u| over segments where u_sing exists.
double fixed_point_residual(const ControlProtocol& u, const PmpDiagnostics& diag) {
  double r = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    if (diag.u_sing[k]) r = std::max(r, std::abs(*diag.u_sing[k] - u.values[k]));
  }
  return r;
}

}  // namespace

OptimizationResult singular_self_consistency(const Model& model, const ControlProtocol& u0,
                                             const SelfConsistencyConfig& cfg,
                                             const std::optional<Operator>& rho0) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw std::invalid_argument("self-consistency damping must lie in [0, 1]");
  }
  if (cfg.min_alpha <= 0.0) throw std::invalid_argument("self-consistency min_alpha must be > 0");
  u0.validate();
  const Operator initial = rho0.value_or(coherent_x_state(model.n_spins()));
  const int substeps = resolve_substeps(cfg.substeps, u0.duration, u0.segments());

  ControlProtocol start = u0;
  start.u_max = 0.0;
  const PmpDiagnostics start_diag = compute_diagnostics(model, start, initial, cfg.cost, substeps);

  // One damped run from u0. Returns false when the iterates blow up or the
  // residual max |u_sing - u| grows past twice its running minimum, which is
  // how an unstable direction of the map shows itself.
  auto attempt = [&](double alpha, OptimizationResult& r) {
    r = OptimizationResult{};
    r.best = start;
    r.damping = alpha;
    PmpDiagnostics diag = start_diag;
    r.cost_history.push_back(-diag.fisher_T);
    double residual = fixed_point_residual(r.best, diag);
    double lowest = residual;
    bool stable = true;
    for (int it = 0; it < cfg.max_iters; ++it) {
      double scale = 1.0;
      for (double v : r.best.values) scale = std::max(scale, std::abs(v));
      if (residual <= cfg.tol * scale) {
        r.converged = true;
        break;
      }
      ControlProtocol next = r.best;
      double next_scale = 0.0;
      for (std::size_t k = 0; k < next.values.size(); ++k) {
        if (diag.u_sing[k]) {
          next.values[k] = (1.0 - alpha) * r.best.values[k] + alpha * *diag.u_sing[k];
        }
        next_scale = std::max(next_scale, std::abs(next.values[k]));
      }
      if (!std::isfinite(next_scale) || next_scale > cfg.divergence_bound) {
        stable = false;
        break;
      }
      PmpDiagnostics trial;
      try {
        trial = compute_diagnostics(model, next, initial, cfg.cost, substeps);
      } catch (const NumericalError&) {
        stable = false;
        break;
      }
      r.best = std::move(next);
      diag = std::move(trial);
      residual = fixed_point_residual(r.best, diag);
      r.cost_history.push_back(-diag.fisher_T);
      ++r.iterations;
      lowest = std::min(lowest, residual);
      if (residual > 2.0 * lowest) {
        stable = false;
        break;
      }
    }
    r.fisher = diag.fisher_T;
    r.lc_intervals = check_legendre_clebsch(diag.gfg, r.best.duration, 0.0);
    r.diagnostics = std::move(diag);
    return stable;
  };

  OptimizationResult r;
  double alpha = cfg.alpha;
  while (true) {
    if (attempt(alpha, r) || alpha == 0.0) return r;
    if (alpha * 0.5 < cfg.min_alpha) break;
    alpha *= 0.5;
  }
  r.diverged = true;
  return r;
}

std::vector<ScanRow> scan_qfi_vs_T(const Model& model, const std::vector<double>& durations,
                                   double segments_per_time, const OptimizerConfig& cfg,
                                   const std::optional<Operator>& rho0) {
  cfg.validate();
  if (!(segments_per_time > 0.0)) throw std::invalid_argument("segments per time must be > 0");
  const Operator initial = rho0.value_or(coherent_x_state(model.n_spins()));
  const ChannelKind channel = model.spec().channel.kind;

  // Scan points run in parallel; restarts inside each point stay sequential.
  OptimizerConfig inner = cfg;
  inner.threads = 1;
  std::vector<ScanRow> rows(durations.size());
  parallel_for(durations.size(), cfg.threads, [&](std::size_t i) {
    ScanRow& row = rows[i];
    row.duration = durations[i];
    try {
      const int m = std::max(1, static_cast<int>(std::lround(segments_per_time * row.duration)));
      const int substeps = resolve_substeps(cfg.substeps, row.duration, m);
      row.qfi_uncontrolled = evaluate_fisher(
          model, ControlProtocol::constant(row.duration, m, 0.0), initial, cfg.cost, substeps);
      row.result = optimize_protocol(model, row.duration, m, inner, initial);
      row.qfi_opt = row.result.fisher;
      const auto& hoc = row.result.diagnostics.hoc;
      row.hoc_at_opt = std::accumulate(hoc.begin(), hoc.end(), 0.0) / static_cast<double>(hoc.size());
      if (channel == ChannelKind::Depolarization) {
        row.asymptote = 0.0;
      } else if (channel != ChannelKind::None && model.n_spins() == 2) {
        const AugmentedState end =
            propagate_forward(model, row.result.best, initial, substeps).terminal();
        row.asymptote = asymptotic_qfi(
            channel, extract_asymptotic_coeffs(end.rho, end.rho_omega), model.spec().channel.gamma);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace qfipmp
