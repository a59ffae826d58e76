#pragma once

#include "normcrit/certificates.hpp"
#include "normcrit/config.hpp"
#include "normcrit/solver.hpp"
#include "normcrit/spectra.hpp"
#include "normcrit/types.hpp"

#include <string>
#include <vector>

namespace normcrit {

/// Machine-readable artifacts of a run, written under the output directory.
void write_records_json(const std::string& path,
                        const std::vector<CriticalPointRecord>& records);
void write_trace_csv(const std::string& path,
                     const std::vector<CriticalPointRecord>& records);
void write_solution_csv(const std::string& path, const Discretization& disc,
                        const Vector& u);
void write_plot_script(const std::string& path, const std::string& csv_name,
                       int dimension);
void write_certificate_json(const std::string& path,
                            const CertificateReport& report);
void write_spectrum_json(const std::string& path, const Spectrum& spec);
void write_eigenvectors_bin(const std::string& path, const Spectrum& spec);

struct ScanRow {
  double mu = 0.0;
  bool converged = false;
  double lambda = 0.0;
  double energy = 0.0;
  double mass_error = 0.0;
  SolveCase solve_case = SolveCase::NoConverge;
};

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows);

void write_verdicts_json(const std::string& path,
                         const std::vector<SolutionVerdict>& verdicts);

void ensure_directory(const std::string& dir);

}  // namespace normcrit
