//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "qfipmp/channels.hpp"

#include <string>

namespace qfipmp {

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::None:
      return "none";
    case ChannelKind::Depolarization:
      return "depolarization";
    case ChannelKind::Dephasing:
      return "dephasing";
    case ChannelKind::Flipping:
      return "flipping";
  }
  return "none";
}

ChannelKind parse_channel_kind(std::string_view name) {
  for (ChannelKind kind : {ChannelKind::None, ChannelKind::Depolarization, ChannelKind::Dephasing,
                           ChannelKind::Flipping}) {
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown channel kind '" + std::string(name) +
                              "' (expected none, depolarization, dephasing or flipping)");
}

Dissipator::Dissipator(ChannelSpec spec, int n_spins)
    : spec_(spec), n_spins_(n_spins), dim_(SpinOperators(n_spins).dim) {
  if (spec.gamma < 0.0) throw std::invalid_argument("channel rate gamma must be >= 0");
  half_jump_square_sum_ = Operator::Zero(dim_, dim_);
  if (spec.kind == ChannelKind::None || spec.gamma == 0.0) return;

  std::vector<Axis> axes;
  switch (spec.kind) {
    case ChannelKind::Depolarization:
      rate_ = spec.gamma / 3.0;
      axes = {Axis::X, Axis::Y, Axis::Z};
      break;
    case ChannelKind::Dephasing:
      rate_ = spec.gamma;
      axes = {Axis::Z};
      break;
    case ChannelKind::Flipping:
      rate_ = spec.gamma;
      axes = {Axis::X};
      break;
    case ChannelKind::None:
      break;
  }
  for (int site = 0; site < n_spins; ++site) {
    for (Axis axis : axes) {
      Operator jump = site_operator(n_spins, site, 0.5 * pauli(axis));
      half_jump_square_sum_.noalias() += 0.5 * jump * jump;
      jumps_.push_back(std::move(jump));
    }
  }
}

void Dissipator::accumulate(const Operator& x, double scale, Operator& out) const {
  if (jumps_.empty()) return;
  if (x.rows() != dim_ || x.cols() != dim_ || out.rows() != dim_ || out.cols() != dim_) {
    throw std::invalid_argument("dissipator: dimension mismatch");
  }
  const double s = scale * rate_;
  Operator tmp(dim_, dim_);
  for (const Operator& jump : jumps_) {
    tmp.noalias() = jump * x;
    out.noalias() += s * tmp * jump;
  }
  out.noalias() -= s * half_jump_square_sum_ * x;
  out.noalias() -= s * x * half_jump_square_sum_;
}

Operator Dissipator::apply(const Operator& x) const {
  Operator out = Operator::Zero(dim_, dim_);
  accumulate(x, 1.0, out);
  return out;
}

Operator Dissipator::superoperator() const {
  const Eigen::Index d2 = dim_ * dim_;
  Operator super = Operator::Zero(d2, d2);
  if (jumps_.empty()) return super;
  const Operator id = Operator::Identity(dim_, dim_);
  // vec(A X B) = (B^T kron A) vec(X) for column stacking.
  for (const Operator& jump : jumps_) super += kron(jump.transpose(), jump);
  super -= kron(id, half_jump_square_sum_);
  super -= kron(half_jump_square_sum_.transpose(), id);
  return rate_ * super;
}

Operator dissipator(const ChannelSpec& spec, int n_spins, const Operator& rho) {
  return Dissipator(spec, n_spins).apply(rho);
}

std::vector<DfElement> df_basis(const ChannelSpec& spec, int n_spins) {
  std::vector<DfElement> basis;
  if (spec.kind != ChannelKind::Dephasing && spec.kind != ChannelKind::Flipping) return basis;

  const Axis axis = spec.kind == ChannelKind::Dephasing ? Axis::Z : Axis::X;
  const char letter = spec.kind == ChannelKind::Dephasing ? 'z' : 'x';
  for (int k = n_spins; k >= 1; --k) {
    std::vector<Operator> factors;
    std::string label = k == n_spins ? "" : "bar";
    for (int n = 0; n < n_spins - k; ++n) {
      factors.push_back(pauli(Axis::Identity));
      label += '0';
    }
    for (int n = 0; n < k; ++n) {
      factors.push_back(pauli(axis));
      label += letter;
    }
    basis.push_back({label, bar_symmetrize(n_spins, factors)});
  }
  return basis;
}

}  // namespace qfipmp
