//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "qfipmp/fisher.hpp"

#include <cmath>

namespace qfipmp {

namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Eigendecomposition of rho with the pair mask and inverse pair sums.
struct EigenFrame {
  HermitianEigen eigen;
  BoolArray retained;
  Eigen::ArrayXXd inverse_sum;  // 1 / (w_i + w_j), zero where masked
};

EigenFrame make_frame(const Operator& rho, double tol) {
  EigenFrame f{hermitian_eig(rho), {}, {}};
  const Eigen::Index d = rho.rows();
  const double threshold = tol * rho.trace().real();
  f.retained.resize(d, d);
  f.inverse_sum.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double s = f.eigen.values(i) + f.eigen.values(j);
      f.retained(i, j) = s > threshold;
      f.inverse_sum(i, j) = f.retained(i, j) ? 1.0 / s : 0.0;
    }
  }
  return f;
}

void check_pair(const Operator& rho, const Operator& rho_omega) {
  if (rho.rows() != rho.cols() || rho_omega.rows() != rho.rows() ||
      rho_omega.cols() != rho.cols()) {
    throw std::invalid_argument("rho and rho_omega must be square with equal dimensions");
  }
}

// SLD in the eigenbasis of rho.
Operator eigenbasis_sld(const EigenFrame& f, const Operator& rho_omega) {
  const Operator& v = f.eigen.vectors;
  const Operator r = v.adjoint() * rho_omega * v;
  return (2.0 * r.array() * f.inverse_sum.cast<Complex>()).matrix();
}

// Eigenbasis slices of dL/drho_ab and dL/drho_w,ab for one (a, b).
struct EigenSlices {
  Operator wrt_rho;
  Operator wrt_rho_omega;
};

class PartialsBuilder {
 public:
  PartialsBuilder(const EigenFrame& f, const Operator& sld_eig)
      : f_(f), sld_eig_(sld_eig), inv_(f.inverse_sum.cast<Complex>()) {
    const Operator& v = f.eigen.vectors;
    // V^dagger L V = sld_eig, so V^dagger L = sld_eig V^dagger and L V = V sld_eig.
    vd_l_ = sld_eig_ * v.adjoint();
    l_v_ = v * sld_eig_;
  }

  EigenSlices slice(Eigen::Index a, Eigen::Index b) const {
    const Operator& v = f_.eigen.vectors;
    const Eigen::VectorXcd va = v.row(a).adjoint();  // V^dagger e_a
    const Eigen::RowVectorXcd ub = v.row(b);         // e_b^T V
    // rho X + X rho = -(E_ab L + L E_ab)
    const Operator rhs_rho = -(va * l_v_.row(b) + vd_l_.col(a) * ub);
    // rho Y + Y rho = 2 E_ab
    const Operator rhs_rho_omega = 2.0 * va * ub;
    return {(rhs_rho.array() * inv_).matrix(), (rhs_rho_omega.array() * inv_).matrix()};
  }

 private:
  const EigenFrame& f_;
  const Operator& sld_eig_;
  Eigen::ArrayXXcd inv_;
  Operator vd_l_;
  Operator l_v_;
};

}  // namespace

SldResult sld(const Operator& rho, const Operator& rho_omega, double tol) {
  check_pair(rho, rho_omega);
  const EigenFrame f = make_frame(rho, tol);
  const Operator l_eig = eigenbasis_sld(f, rho_omega);
  const Operator& v = f.eigen.vectors;
  return {v * l_eig * v.adjoint(), f.retained, f.eigen};
}

double qfi(const Operator& rho, const Operator& rho_omega, double tol) {
  const SldResult s = sld(rho, rho_omega, tol);
  return trace_product(rho, s.sld * s.sld).real();
}

SldPartials sld_partials(const Operator& rho, const Operator& rho_omega, double tol) {
  check_pair(rho, rho_omega);
  const EigenFrame f = make_frame(rho, tol);
  const Operator l_eig = eigenbasis_sld(f, rho_omega);
  const PartialsBuilder builder(f, l_eig);
  const Operator& v = f.eigen.vectors;
  const Eigen::Index d = rho.rows();

  std::vector<Operator> wrt_rho, wrt_rho_omega;
  wrt_rho.reserve(static_cast<std::size_t>(d * d));
  wrt_rho_omega.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      const EigenSlices s = builder.slice(a, b);
      wrt_rho.push_back(v * s.wrt_rho * v.adjoint());
      wrt_rho_omega.push_back(v * s.wrt_rho_omega * v.adjoint());
    }
  }
  return SldPartials(d, std::move(wrt_rho), std::move(wrt_rho_omega));
}

CostatePair qfi_costate_boundary(const Operator& rho, const Operator& rho_omega, double tol) {
  check_pair(rho, rho_omega);
  const EigenFrame f = make_frame(rho, tol);
  const Operator l_eig = eigenbasis_sld(f, rho_omega);
  const PartialsBuilder builder(f, l_eig);
  const Operator& v = f.eigen.vectors;
  const Eigen::Index d = rho.rows();

  // Tr(rho (X L + L X)) is basis independent; in the eigenbasis of rho it is
  // sum_ij X_ij L_ji (w_i + w_j).
  Eigen::ArrayXXd pair_sum(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) pair_sum(i, j) = f.eigen.values(i) + f.eigen.values(j);
  }
  const Eigen::ArrayXXcd weight = l_eig.transpose().array() * pair_sum.cast<Complex>();
  const Operator sld_op = v * l_eig * v.adjoint();
  const Operator sld_sq = sld_op * sld_op;

  CostatePair out{Operator::Zero(d, d), Operator::Zero(d, d)};
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      const EigenSlices s = builder.slice(a, b);
      const Complex chain_rho = (s.wrt_rho.array() * weight).sum();
      const Complex chain_rho_omega = (s.wrt_rho_omega.array() * weight).sum();
      // Costate index is transposed relative to the derivative index.
      out.lambda(b, a) = -(sld_sq(b, a) + chain_rho);
      out.lambda_omega(b, a) = -chain_rho_omega;
    }
  }
  return out;
}

Operator measurement_basis(int n_spins) {
  Operator h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  h /= std::sqrt(2.0);
  Operator u = Operator::Identity(1, 1);
  for (int n = 0; n < n_spins; ++n) u = kron(u, h);
  return u;
}

namespace {

// Columns of W = exp(+i Jz phi) U span the rotated measurement basis:
// diag(W^dagger rho W) are the outcome probabilities.
Operator rotated_measurement(int n_spins, double phi) {
  const Operator jz = collective_spin(n_spins, Axis::Z);
  return unitary_evolution(jz, -phi) * measurement_basis(n_spins);
}

}  // namespace

double cfi(const Operator& rho, const Operator& rho_omega, double phi, double tol) {
  check_pair(rho, rho_omega);
  const int n = spin_count_for_dimension(rho.rows());
  const Operator w = rotated_measurement(n, phi);
  const Eigen::VectorXd p = (w.adjoint() * rho * w).diagonal().real();
  const Eigen::VectorXd q = (w.adjoint() * rho_omega * w).diagonal().real();
  const double threshold = tol * rho.trace().real();
  double sum = 0.0;
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    if (p(m) > threshold) sum += q(m) * q(m) / p(m);
  }
  return sum;
}

CostatePair cfi_costate_boundary(const Operator& rho, const Operator& rho_omega, double phi,
                                 double tol) {
  check_pair(rho, rho_omega);
  const int n = spin_count_for_dimension(rho.rows());
  const Operator w = rotated_measurement(n, phi);
  const Eigen::VectorXd p = (w.adjoint() * rho * w).diagonal().real();
  const Eigen::VectorXd q = (w.adjoint() * rho_omega * w).diagonal().real();
  const double threshold = tol * rho.trace().real();
  Eigen::VectorXcd diag_lambda = Eigen::VectorXcd::Zero(p.size());
  Eigen::VectorXcd diag_lambda_omega = Eigen::VectorXcd::Zero(p.size());
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    if (p(m) > threshold) {
      diag_lambda(m) = q(m) * q(m) / (p(m) * p(m));
      diag_lambda_omega(m) = -2.0 * q(m) / p(m);
    }
  }
  return {w * diag_lambda.asDiagonal() * w.adjoint(),
          w * diag_lambda_omega.asDiagonal() * w.adjoint()};
}

double fisher_information(const CostSpec& cost, const AugmentedState& terminal) {
  return cost.kind == CostKind::Qfi ? qfi(terminal.rho, terminal.rho_omega)
                                    : cfi(terminal.rho, terminal.rho_omega, cost.phi);
}

CostatePair terminal_costate(const CostSpec& cost, const AugmentedState& terminal) {
  return cost.kind == CostKind::Qfi
             ? qfi_costate_boundary(terminal.rho, terminal.rho_omega)
             : cfi_costate_boundary(terminal.rho, terminal.rho_omega, cost.phi);
}

AsymptoticCoeffs extract_asymptotic_coeffs(const Operator& rho, const Operator& rho_omega) {
  if (rho.rows() != 4) throw std::invalid_argument("asymptotic coefficients are defined for N = 2");
  const Operator sz = pauli(Axis::Z);
  const Operator sx = pauli(Axis::X);
  const Operator id = pauli(Axis::Identity);
  const Operator bar0z = kron(id, sz) + kron(sz, id);
  AsymptoticCoeffs c;
  c.a_z = trace_product(rho, kron(sz, sz)).real();
  c.a_x = trace_product(rho, kron(sx, sx)).real();
  c.b_z = trace_product(rho_omega, bar0z).real() / 8.0;
  return c;
}

double asymptotic_qfi(ChannelKind channel, const AsymptoticCoeffs& coeffs, double gamma) {
  switch (channel) {
    case ChannelKind::Dephasing:
      return 32.0 * coeffs.b_z * coeffs.b_z / (1.0 + coeffs.a_z);
    case ChannelKind::Flipping:
      if (!(gamma > 0.0)) throw std::invalid_argument("flipping asymptote needs gamma > 0");
      return 8.0 * coeffs.a_x * coeffs.a_x / (gamma * gamma);
    case ChannelKind::Depolarization:
      return 0.0;
    case ChannelKind::None:
      break;
  }
  throw std::invalid_argument("no long-time asymptote without decoherence");
}

AugmentedState flipping_asymptotic_state(int n_spins, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const Eigen::Index dim = SpinOperators(n_spins).dim;
  std::vector<Operator> all_x(static_cast<std::size_t>(n_spins), pauli(Axis::X));
  Operator x_string = Operator::Identity(1, 1);
  for (const Operator& f : all_x) x_string = kron(x_string, f);
  all_x.back() = pauli(Axis::Y);
  const double scale = 1.0 / static_cast<double>(dim);
  AugmentedState s;
  s.rho = scale * (Operator::Identity(dim, dim) + x_string);
  s.rho_omega = bar_symmetrize(n_spins, all_x) * (2.0 * scale / gamma);
  return s;
}

double flipping_asymptotic_cfi(int n_spins, double gamma, double phi) {
  const double n = n_spins;
  const double prefactor = 4.0 / (gamma * gamma);
  if (std::abs(phi) < 1e-8) return prefactor * n;
  const double c2n = std::pow(std::cos(phi), 2.0 * n);
  const double t = std::tan(phi);
  return prefactor * n * n * t * t * c2n / (1.0 - c2n);
}

}  // namespace qfipmp
