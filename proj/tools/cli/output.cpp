//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace qfipmp::cli {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalError("refusing to serialize a non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::string& config_snapshot,
                     const std::vector<std::string>& header)
    : out_(&out), columns_(header.size()) {
  std::istringstream lines(config_snapshot);
  std::string line;
  while (std::getline(lines, line)) *out_ << "# " << line << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) *out_ << (i ? "," : "") << header[i];
  *out_ << "\n";
}

void CsvWriter::separator() {
  if (in_row_ == columns_) throw std::logic_error("CsvWriter: too many fields in row");
  if (in_row_++ > 0) *out_ << ',';
}

CsvWriter& CsvWriter::field(double v) {
  const std::string text = format_double(v);
  separator();
  *out_ << text;
  return *this;
}

CsvWriter& CsvWriter::field(const std::optional<double>& v) {
  if (v) return field(*v);
  separator();
  return *this;
}

CsvWriter& CsvWriter::field(const std::string& v) {
  separator();
  *out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("CsvWriter: row is missing fields");
  *out_ << "\n";
  in_row_ = 0;
}

std::vector<std::string> trajectory_header(const Model& model) {
  std::vector<std::string> header = {"t", "u", "qfi_running", "tr_rho", "min_eig_rho"};
  for (const DfElement& e : df_basis(model.spec().channel, model.n_spins())) {
    header.push_back("df_overlap_" + e.label);
  }
  return header;
}

void write_trajectory_csv(std::ostream& out, const std::string& config_snapshot,
                          const Model& model, const ControlProtocol& control,
                          const AugmentedTrajectory& trajectory) {
  const std::vector<DfElement> df = df_basis(model.spec().channel, model.n_spins());
  CsvWriter csv(out, config_snapshot, trajectory_header(model));
  for (std::size_t k = 0; k < trajectory.rho.size(); ++k) {
    const Operator& rho = trajectory.rho[k];
    const std::size_t segment = std::min(k, control.values.size() - 1);
    const Eigen::SelfAdjointEigenSolver<Operator> eig(0.5 * (rho + rho.adjoint()),
                                                      Eigen::EigenvaluesOnly);
    csv.field(trajectory.times[k])
        .field(control.values[segment])
        .field(qfi(rho, trajectory.rho_omega[k]))
        .field(rho.trace().real())
        .field(eig.eigenvalues().minCoeff());
    for (const DfElement& e : df) csv.field(trace_product(rho, e.op).real());
    csv.end_row();
  }
}

void write_control_csv(std::ostream& out, const std::string& config_snapshot,
                       const ControlProtocol& control, const PmpDiagnostics& d,
                       const FirstOrderReport& report) {
  CsvWriter csv(out, config_snapshot, kControlHeader);
  for (std::size_t k = 0; k < control.values.size(); ++k) {
    csv.field(d.times[k])
        .field(control.values[k])
        .field(d.phi[k])
        .field(d.hoc[k])
        .field(d.gfg[k])
        .field(d.ffg[k])
        .field(d.u_sing[k])
        .field(std::string(to_string(report.classes[k])));
    csv.end_row();
  }
}

void write_scan_csv(std::ostream& out, const std::string& config_snapshot,
                    const std::vector<ScanRow>& rows) {
  CsvWriter csv(out, config_snapshot, kScanHeader);
  for (const ScanRow& row : rows) {
    if (!row.error.empty()) continue;
    csv.field(row.duration)
        .field(row.qfi_opt)
        .field(row.qfi_uncontrolled)
        .field(row.hoc_at_opt)
        .field(row.asymptote);
    csv.end_row();
  }
}

}  // namespace qfipmp::cli
