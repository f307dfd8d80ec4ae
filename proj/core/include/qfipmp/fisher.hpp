//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "qfipmp/channels.hpp"
#include "qfipmp/dynamics.hpp"
#include "qfipmp/operators.hpp"

namespace qfipmp {

/// Eigenvalue pairs with lambda_i + lambda_j <= kRankTolerance * Tr(rho) are
/// treated as zero and dropped from the SLD and its derivatives.
inline constexpr double kRankTolerance = 1e-10;

struct SldResult {
  Operator sld;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> retained;  // eigenbasis pairs (i, j)
  HermitianEigen eigen;                                          // of rho
};

/// Symmetric logarithmic derivative: solves rho_omega = (L rho + rho L)/2
/// in the eigenbasis of rho, skipping masked pairs.
SldResult sld(const Operator& rho, const Operator& rho_omega, double tol = kRankTolerance);

/// Tr(rho L^2). The terminal cost for QFI optimization is its negative.
double qfi(const Operator& rho, const Operator& rho_omega, double tol = kRankTolerance);

/// dL_ij/d(rho_ab) and dL_ij/d(rho_omega_ab), treating every matrix entry as
/// an independent complex variable. Each (a, b) slice is a dim x dim matrix
/// obtained by one entrywise division in the eigenbasis of rho.
class SldPartials {
 public:
  SldPartials(Eigen::Index dim, std::vector<Operator> wrt_rho, std::vector<Operator> wrt_rho_omega)
      : dim_(dim), wrt_rho_(std::move(wrt_rho)), wrt_rho_omega_(std::move(wrt_rho_omega)) {}

  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] const Operator& wrt_rho(Eigen::Index a, Eigen::Index b) const {
    return wrt_rho_[static_cast<std::size_t>(a * dim_ + b)];
  }
  [[nodiscard]] const Operator& wrt_rho_omega(Eigen::Index a, Eigen::Index b) const {
    return wrt_rho_omega_[static_cast<std::size_t>(a * dim_ + b)];
  }

 private:
  Eigen::Index dim_;
  std::vector<Operator> wrt_rho_;
  std::vector<Operator> wrt_rho_omega_;
};

SldPartials sld_partials(const Operator& rho, const Operator& rho_omega,
                         double tol = kRankTolerance);

/// Costates at T for the cost -QFI, contracted from sld_partials:
///   lambda_ba   = -[ (L^2)_ba + Tr(rho (dL/drho_ab L + L dL/drho_ab)) ]
///   lambda_w,ba = -Tr(rho (dL/drho_w,ab L + L dL/drho_w,ab))
CostatePair qfi_costate_boundary(const Operator& rho, const Operator& rho_omega,
                                 double tol = kRankTolerance);

/// Columns are the product sigma_x eigenbasis |+/->^N, which diagonalizes Jx.
Operator measurement_basis(int n_spins);

/// Fisher information of a Jx-basis measurement after the phase rotation
/// exp(-i Jz phi). Outcomes with probability <= tol are skipped.
double cfi(const Operator& rho, const Operator& rho_omega, double phi,
           double tol = kRankTolerance);

/// Costates at T for the cost -CFI(phi); diagonal in the rotated
/// measurement basis before being conjugated back.
CostatePair cfi_costate_boundary(const Operator& rho, const Operator& rho_omega, double phi,
                                 double tol = kRankTolerance);

enum class CostKind { Qfi, Cfi };

struct CostSpec {
  CostKind kind = CostKind::Qfi;
  double phi = 0.0;  // measurement rotation, CFI only

  bool operator==(const CostSpec&) const = default;
};

/// QFI or CFI(phi) of the terminal augmented state (the cost is its negative).
double fisher_information(const CostSpec& cost, const AugmentedState& terminal);
CostatePair terminal_costate(const CostSpec& cost, const AugmentedState& terminal);

/// Two-spin decoherence-free coefficients
///   a_z = Tr(rho zz), a_x = Tr(rho xx), b_z = Tr(rho_omega bar(0z)) / 8.
struct AsymptoticCoeffs {
  double a_z = 0.0;
  double b_z = 0.0;
  double a_x = 0.0;
};

AsymptoticCoeffs extract_asymptotic_coeffs(const Operator& rho, const Operator& rho_omega);

/// Closed-form long-time QFI: 32 b_z^2 / (1 + a_z) for dephasing,
/// 8 a_x^2 / gamma^2 for flipping and 0 for depolarization. Throws
/// std::invalid_argument for the noiseless channel.
double asymptotic_qfi(ChannelKind channel, const AsymptoticCoeffs& coeffs, double gamma);

/// Long-time flipping-channel state from the coherent-x start:
///   rho = [I + (x)^N] / 2^N,  rho_omega = bar(x^(N-1) y) / (2^(N-1) gamma).
AugmentedState flipping_asymptotic_state(int n_spins, double gamma);

/// (4/gamma^2) N^2 tan^2(phi) cos^2N(phi) / (1 - cos^2N(phi)) for the state
/// above; tends to 4N/gamma^2 as phi -> 0.
double flipping_asymptotic_cfi(int n_spins, double gamma, double phi);

}  // namespace qfipmp
