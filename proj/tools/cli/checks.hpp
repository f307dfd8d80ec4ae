//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace qfipmp::cli {

struct CheckOptions {
  std::uint64_t seed = 7;
  /// Flip the sign of the channel term in the costate equations. Only for
  /// demonstrating that the gradient check catches it.
  bool inject_sign_error = false;
};

struct CheckOutcome {
  std::string name;
  std::string channel;  // empty when not channel-specific
  double value = 0.0;   // measured error or margin
  double tolerance = 0.0;
  bool passed = false;
};

/// Gradient identity, H_oc flatness and dC/dT, step halving, trajectory
/// invariants, CFI <= QFI, controlled >= uncontrolled, unitary equivalence,
/// analytic vs brute-force second-order quantities and the Legendre-Clebsch
/// sign on a noiseless optimum. Small N = 2 instances throughout.
std::vector<CheckOutcome> run_check_suite(const CheckOptions& options);

void print_check_table(std::ostream& out, const std::vector<CheckOutcome>& outcomes);

}  // namespace qfipmp::cli
