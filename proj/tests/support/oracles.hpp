//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Reference computations for the tests. Everything here is written
// independently of the library internals: explicit Pauli strings, plain
// loops, matrix exponentials from Eigen's unsupported module, and central
// differences of full re-propagations.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qfipmp/dynamics.hpp"
#include "qfipmp/fisher.hpp"
#include "qfipmp/pmp.hpp"

namespace qfipmp::testing {

using Rng = std::mt19937_64;

inline Operator pauli_matrix(char axis) {
  Operator m = Operator::Zero(2, 2);
  switch (axis) {
    case '0': m << 1, 0, 0, 1; break;
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
  }
  return m;
}

/// Tensor product of single-spin Paulis spelled as a string, e.g. "zx0".
/// Leftmost character is the most significant qubit.
inline Operator pauli_string(const std::string& axes) {
  Operator out = Operator::Identity(1, 1);
  for (char a : axes) {
    const Operator p = pauli_matrix(a);
    Operator next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * p;
    out = next;
  }
  return out;
}

/// sigma_axis on one site of an n-spin register.
inline Operator local_pauli(int n, int site, char axis) {
  std::string s(static_cast<std::size_t>(n), '0');
  s[static_cast<std::size_t>(site)] = axis;
  return pauli_string(s);
}

inline Operator collective(int n, char axis) {
  const Eigen::Index d = Eigen::Index{1} << n;
  Operator j = Operator::Zero(d, d);
  for (int i = 0; i < n; ++i) j += 0.5 * local_pauli(n, i, axis);
  return j;
}

/// Lindblad dissipator written out term by term.
inline Operator reference_dissipator(ChannelKind kind, double gamma, int n, const Operator& x) {
  std::string axes;
  double rate = gamma;
  switch (kind) {
    case ChannelKind::None: return Operator::Zero(x.rows(), x.cols());
    case ChannelKind::Depolarization: axes = "xyz"; rate = gamma / 3.0; break;
    case ChannelKind::Dephasing: axes = "z"; break;
    case ChannelKind::Flipping: axes = "x"; break;
  }
  Operator out = Operator::Zero(x.rows(), x.cols());
  for (int i = 0; i < n; ++i) {
    for (char a : axes) {
      const Operator l = 0.5 * local_pauli(n, i, a);
      out += rate * (l * x * l.adjoint() - 0.5 * (l.adjoint() * l * x + x * l.adjoint() * l));
    }
  }
  return out;
}

inline Operator random_hermitian(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> g;
  Operator a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

/// Full-rank density matrix with smallest eigenvalue bounded away from zero.
inline Operator random_density(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> g;
  Operator a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  Operator rho = a * a.adjoint() + 0.2 * Operator::Identity(dim, dim);
  return rho / rho.trace().real();
}

/// Traceless Hermitian, the shape of d(rho)/d(omega).
inline Operator random_traceless(Eigen::Index dim, Rng& rng) {
  Operator h = random_hermitian(dim, rng);
  h -= (h.trace() / static_cast<double>(dim)) * Operator::Identity(dim, dim);
  return h;
}

inline ControlProtocol random_protocol(Rng& rng, double duration, int segments, double amplitude) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  ControlProtocol p = ControlProtocol::constant(duration, segments, 0.0);
  for (double& v : p.values) v = u(rng);
  return p;
}

inline Model make_model(ChannelKind kind, double gamma = 1.5, int n_spins = 2, double chi = 10.0,
                        double omega = 0.0) {
  ModelSpec s;
  s.n_spins = n_spins;
  s.chi = chi;
  s.omega = omega;
  s.channel = {kind, kind == ChannelKind::None ? 0.0 : gamma};
  return Model(s);
}

inline constexpr ChannelKind kAllChannels[] = {ChannelKind::None, ChannelKind::Depolarization,
                                               ChannelKind::Dephasing, ChannelKind::Flipping};

/// Error of a computed vector against a reference, relative to the largest
/// reference entry: max_k |a_k - b_k| / max_k |b_k|.
inline double relative_error(const std::vector<double>& computed,
                             const std::vector<double>& reference) {
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    err = std::max(err, std::abs(computed[k] - reference[k]));
    scale = std::max(scale, std::abs(reference[k]));
  }
  return scale > 0.0 ? err / scale : err;
}

inline double relative_error(double computed, double reference) {
  return std::abs(computed - reference) / std::max(std::abs(reference), 1e-300);
}

/// Central difference of C = -F with respect to each segment amplitude.
inline std::vector<double> fd_cost_gradient(const Model& model, const ControlProtocol& p,
                                            const Operator& rho0, const CostSpec& cost,
                                            int substeps, double h = 1e-4) {
  std::vector<double> g(p.values.size());
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    ControlProtocol up = p;
    ControlProtocol down = p;
    up.values[k] += h;
    down.values[k] -= h;
    g[k] = -(evaluate_fisher(model, up, rho0, cost, substeps) -
             evaluate_fisher(model, down, rho0, cost, substeps)) /
           (2.0 * h);
  }
  return g;
}

/// Exact noiseless propagation through matrix exponentials of -iH dt.
inline Operator exact_unitary_state(const ModelSpec& spec, const ControlProtocol& p,
                                    const Operator& rho0) {
  const int n = spec.n_spins;
  const Operator jz = collective(n, 'z');
  const Operator jx = collective(n, 'x');
  Operator rho = rho0;
  for (double u : p.values) {
    const Operator h = spec.chi * jz * jz + spec.omega * jz + u * jx;
    const Operator step = (Complex(0, -p.segment_length()) * h).exp();
    rho = step * rho * step.adjoint();
  }
  return rho;
}

/// Pure-state QFI 4(<dpsi|dpsi> - |<psi|dpsi>|^2) with psi(T) from matrix
/// exponentials and dpsi/d(omega) by a central difference in omega.
inline double wavefunction_qfi(ModelSpec spec, const ControlProtocol& p,
                               const Eigen::VectorXcd& psi0) {
  auto evolve = [&](double omega) {
    ModelSpec s = spec;
    s.omega = omega;
    const Operator jz = collective(s.n_spins, 'z');
    const Operator jx = collective(s.n_spins, 'x');
    Eigen::VectorXcd psi = psi0;
    for (double u : p.values) {
      const Operator h = s.chi * jz * jz + s.omega * jz + u * jx;
      psi = (Complex(0, -p.segment_length()) * h).exp() * psi;
    }
    return psi;
  };
  const double h = 1e-5;
  const Eigen::VectorXcd psi = evolve(spec.omega);
  const Eigen::VectorXcd dpsi = (evolve(spec.omega + h) - evolve(spec.omega - h)) / (2.0 * h);
  return 4.0 * (dpsi.squaredNorm() - std::norm(psi.dot(dpsi)));
}

/// Largest eigenvalue state of Jx, built by brute-force diagonalization.
inline Eigen::VectorXcd coherent_x_vector(int n) {
  Eigen::SelfAdjointEigenSolver<Operator> es(collective(n, 'x'));
  return es.eigenvectors().col(es.eigenvectors().cols() - 1);
}

/// Perturb one complex matrix entry (a, b) as an independent variable.
inline Operator bump(const Operator& m, Eigen::Index a, Eigen::Index b, Complex delta) {
  Operator out = m;
  out(a, b) += delta;
  return out;
}

/// SLD by a dense Kronecker-form linear solve (no eigenbasis), used to
/// cross-check sld() on full-rank states.
inline Operator reference_sld(const Operator& rho, const Operator& rho_omega) {
  const Eigen::Index d = rho.rows();
  const Operator id = Operator::Identity(d, d);
  // vec(L rho + rho L) = (rho^T (x) I + I (x) rho) vec(L), column stacking.
  Operator lhs(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      lhs.block(i * d, j * d, d, d) = rho.transpose()(i, j) * id + (i == j ? rho : Operator::Zero(d, d));
  Eigen::VectorXcd rhs = Eigen::Map<const Eigen::VectorXcd>(rho_omega.data(), d * d) * 2.0;
  Eigen::VectorXcd v = lhs.fullPivLu().solve(rhs);
  return Eigen::Map<Operator>(v.data(), d, d);
}

}  // namespace qfipmp::testing
