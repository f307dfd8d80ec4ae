//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qfipmp/operators.hpp"

namespace qfipmp {

enum class ChannelKind { None, Depolarization, Dephasing, Flipping };

/// Config-file spelling: "none", "depolarization", "dephasing", "flipping".
std::string_view to_string(ChannelKind kind);

/// Inverse of to_string; throws std::invalid_argument on any other spelling.
ChannelKind parse_channel_kind(std::string_view name);

struct ChannelSpec {
  ChannelKind kind = ChannelKind::None;
  double gamma = 0.0;  // 1/time

  bool operator==(const ChannelSpec&) const = default;
};

/// Per-spin Lindblad dissipator
///   D(X) = rate * sum_k ( L_k X L_k - 1/2 {L_k^2, X} ),
/// with Hermitian jump operators L = sigma^(i)/2. Depolarization uses
/// rate gamma/3 and all three Paulis on every site; dephasing and flipping use
/// rate gamma with sigma_z and sigma_x respectively.
///
/// The same map acts on rho, d(rho)/d(omega) and (with the caller's sign) on
/// the costates, because the jump operators are Hermitian.
class Dissipator {
 public:
  Dissipator(ChannelSpec spec, int n_spins);

  [[nodiscard]] Operator apply(const Operator& x) const;

  /// out += scale * D(x). Avoids temporaries in the integrator hot loop.
  void accumulate(const Operator& x, double scale, Operator& out) const;

  [[nodiscard]] bool is_zero() const { return jumps_.empty(); }
  [[nodiscard]] const ChannelSpec& spec() const { return spec_; }
  [[nodiscard]] int n_spins() const { return n_spins_; }
  [[nodiscard]] double rate() const { return rate_; }
  /// Jump operators L_k (already including the 1/2 of the spin operator).
  [[nodiscard]] const std::vector<Operator>& jumps() const { return jumps_; }
  [[nodiscard]] const Operator& half_jump_square_sum() const { return half_jump_square_sum_; }

  /// Column-stacked superoperator S with vec(D(X)) = S vec(X).
  [[nodiscard]] Operator superoperator() const;

 private:
  ChannelSpec spec_;
  int n_spins_;
  Eigen::Index dim_;
  double rate_ = 0.0;
  std::vector<Operator> jumps_;
  Operator half_jump_square_sum_;  // 1/2 sum_k L_k^2
};

/// D(rho) for a one-off evaluation. Throws std::invalid_argument on a
/// dimension mismatch.
Operator dissipator(const ChannelSpec& spec, int n_spins, const Operator& rho);

struct DfElement {
  std::string label;
  Operator op;
};

/// Permutation-symmetric operators annihilated by the dissipator, identity
/// excluded. For the Pauli channels the null space is the commutant of the
/// jump operators, so the symmetric part is spanned by bar(s0^(N-k) sa^k),
/// k = 1..N, with a = z (dephasing) or x (flipping); depolarization has none.
/// Labels for N = 2 are "zz", "bar0z", "xx", "bar0x".
std::vector<DfElement> df_basis(const ChannelSpec& spec, int n_spins);

}  // namespace qfipmp
