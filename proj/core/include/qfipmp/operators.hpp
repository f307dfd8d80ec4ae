//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <complex>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace qfipmp {

using Complex = std::complex<double>;

/// Dense complex square matrix on the 2^N dimensional spin Hilbert space.
/// Density matrices, costates, Hamiltonians and Lindblad operators all use it.
using Operator = Eigen::MatrixXcd;

inline constexpr int kMaxSpins = 6;

inline constexpr Complex kI{0.0, 1.0};

enum class Axis { Identity, X, Y, Z };

/// Raised when an integration produces non-finite values or a numerical
/// quantity that must be real picks up a significant imaginary part.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Operator pauli(Axis axis);

/// Kronecker product; the left factor carries the most significant index bit.
Operator kron(const Operator& a, const Operator& b);

/// single acting on spin `site` (0-based, leftmost factor is site 0),
/// identity on every other spin.
Operator site_operator(int n_spins, int site, const Operator& single);

/// Sum over spins of sigma_axis / 2. Throws std::invalid_argument when
/// n_spins is outside [1, kMaxSpins] or axis is Identity.
Operator collective_spin(int n_spins, Axis axis);

/// Sum of tensor products over every distinct arrangement of the factor
/// multiset. Identical factors (exact entrywise equality) are not
/// distinguished, so {sx, sx} yields the single term sx (x) sx.
Operator bar_symmetrize(int n_spins, std::span<const Operator> factors);

Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);

/// Frobenius norm of A - A^dagger.
double hermitian_residual(const Operator& a);

/// Bilinear trace pairing Tr(a b) without forming the product.
Complex trace_product(const Operator& a, const Operator& b);

int spin_count_for_dimension(Eigen::Index dim);

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  Operator vectors;        // columns are orthonormal eigenvectors
};

/// Throws std::invalid_argument when ||A - A^dagger|| > 1e-9 ||A||.
HermitianEigen hermitian_eig(const Operator& a);

/// exp(-i t H) for Hermitian H, through its eigendecomposition.
Operator unitary_evolution(const Operator& hamiltonian, double t);

/// Collective spin operators for a fixed spin count, built once.
struct SpinOperators {
  explicit SpinOperators(int n_spins);

  int n_spins;
  Eigen::Index dim;
  Operator jx, jy, jz;
};

}  // namespace qfipmp
