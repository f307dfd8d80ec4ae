//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "qfipmp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace qfipmp {

namespace {

void require_spin_count(int n_spins) {
  if (n_spins < 1 || n_spins > kMaxSpins) {
    throw std::invalid_argument("spin count must be in [1, " + std::to_string(kMaxSpins) +
                                "], got " + std::to_string(n_spins));
  }
}

}  // namespace

Operator pauli(Axis axis) {
  Operator m = Operator::Zero(2, 2);
  switch (axis) {
    case Axis::Identity:
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case Axis::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case Axis::Y:
      m(0, 1) = -kI;
      m(1, 0) = kI;
      break;
    case Axis::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator site_operator(int n_spins, int site, const Operator& single) {
  require_spin_count(n_spins);
  if (site < 0 || site >= n_spins) {
    throw std::invalid_argument("site index out of range");
  }
  Operator out = Operator::Identity(1, 1);
  const Operator id = pauli(Axis::Identity);
  for (int n = 0; n < n_spins; ++n) {
    out = kron(out, n == site ? single : id);
  }
  return out;
}

Operator collective_spin(int n_spins, Axis axis) {
  require_spin_count(n_spins);
  if (axis == Axis::Identity) {
    throw std::invalid_argument("collective spin needs x, y or z");
  }
  const Operator half_sigma = 0.5 * pauli(axis);
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  Operator j = Operator::Zero(dim, dim);
  for (int n = 0; n < n_spins; ++n) {
    j += site_operator(n_spins, n, half_sigma);
  }
  return j;
}

Operator bar_symmetrize(int n_spins, std::span<const Operator> factors) {
  require_spin_count(n_spins);
  if (static_cast<int>(factors.size()) != n_spins) {
    throw std::invalid_argument("bar_symmetrize expects " + std::to_string(n_spins) +
                                " factors, got " + std::to_string(factors.size()));
  }
  // Label each factor by its first exactly-equal predecessor so the multiset
  // permutations enumerate each distinct arrangement once.
  std::vector<int> labels(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].rows() != 2 || factors[i].cols() != 2) {
      throw std::invalid_argument("bar_symmetrize factors must be 2x2");
    }
    labels[i] = static_cast<int>(i);
    for (std::size_t k = 0; k < i; ++k) {
      if (factors[k] == factors[i]) {
        labels[i] = labels[k];
        break;
      }
    }
  }
  std::sort(labels.begin(), labels.end());

  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  Operator sum = Operator::Zero(dim, dim);
  do {
    Operator term = Operator::Identity(1, 1);
    for (int label : labels) term = kron(term, factors[static_cast<std::size_t>(label)]);
    sum += term;
  } while (std::next_permutation(labels.begin(), labels.end()));
  return sum;
}

Operator commutator(const Operator& a, const Operator& b) {
  Operator out = a * b;
  out.noalias() -= b * a;
  return out;
}

Operator anticommutator(const Operator& a, const Operator& b) {
  Operator out = a * b;
  out.noalias() += b * a;
  return out;
}

double hermitian_residual(const Operator& a) { return (a - a.adjoint()).norm(); }

Complex trace_product(const Operator& a, const Operator& b) {
  // Tr(ab) = sum_ij a_ij b_ji
  return (a.array() * b.transpose().array()).sum();
}

int spin_count_for_dimension(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || n < 1) {
    throw std::invalid_argument("operator dimension is not a power of two");
  }
  return n;
}

HermitianEigen hermitian_eig(const Operator& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_eig: matrix not square");
  const double scale = std::max(a.norm(), 1e-300);
  if (hermitian_residual(a) > 1e-9 * scale) {
    throw std::invalid_argument("hermitian_eig: input is not Hermitian");
  }
  // Symmetrize so rounding in the input does not leak into the solver.
  const Operator herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(herm);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Operator unitary_evolution(const Operator& hamiltonian, double t) {
  const HermitianEigen eig = hermitian_eig(hamiltonian);
  Eigen::VectorXcd phases(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    phases(k) = std::exp(-kI * eig.values(k) * t);
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

SpinOperators::SpinOperators(int n)
    : n_spins(n),
      dim(Eigen::Index{1} << std::clamp(n, 0, kMaxSpins)),
      jx(collective_spin(n, Axis::X)),
      jy(collective_spin(n, Axis::Y)),
      jz(collective_spin(n, Axis::Z)) {}

}  // namespace qfipmp
