//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qfipmp/optimize.hpp"
#include "qfipmp/pmp.hpp"

namespace qfipmp::cli {

/// Comma-separated rows with a header. The config snapshot goes first as
/// "# "-prefixed comment lines. Floats use 17 significant digits; an absent
/// optional is an empty field. Non-finite values throw NumericalError
/// instead of being written.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::string& config_snapshot,
            const std::vector<std::string>& header);

  CsvWriter& field(double v);
  CsvWriter& field(const std::optional<double>& v);
  CsvWriter& field(const std::string& v);
  void end_row();

 private:
  void separator();

  std::ostream* out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

std::string format_double(double v);

inline const std::vector<std::string> kControlHeader = {"t",   "u",   "Phi",    "Hoc",
                                                        "gfg", "ffg", "u_sing", "segment_class"};
inline const std::vector<std::string> kScanHeader = {"T", "qfi_opt", "qfi_uncontrolled",
                                                     "hoc_at_opt", "asymptote"};

/// t, u, qfi_running, tr_rho, min_eig_rho, then df_overlap_<label> for each
/// element of df_basis(channel, N), one row per segment boundary. u on the
/// last row repeats the final segment.
void write_trajectory_csv(std::ostream& out, const std::string& config_snapshot,
                          const Model& model, const ControlProtocol& control,
                          const AugmentedTrajectory& trajectory);

std::vector<std::string> trajectory_header(const Model& model);

void write_control_csv(std::ostream& out, const std::string& config_snapshot,
                       const ControlProtocol& control, const PmpDiagnostics& diagnostics,
                       const FirstOrderReport& report);

void write_scan_csv(std::ostream& out, const std::string& config_snapshot,
                    const std::vector<ScanRow>& rows);

}  // namespace qfipmp::cli
