#ifndef NVSINGLET_IO_HPP
#define NVSINGLET_IO_HPP

#include <string>
#include <vector>

#include "nvsinglet/fit.hpp"
#include "nvsinglet/phase_shift.hpp"
#include "nvsinglet/polarization.hpp"
#include "nvsinglet/rate_model.hpp"
#include "nvsinglet/thermal.hpp"

namespace nvs::io {

// Minimal CSV table: one header row, numeric columns.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // throws if missing
};

std::string to_csv(const CsvTable& table);
CsvTable from_csv_string(const std::string& text);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

// Module-specific schemas.
CsvTable trace_table(const rate::PopulationTrace& trace);  // t_s,pG0,...,ir_rate
CsvTable phase_table(const std::vector<phase::PhasePoint>& points);  // f_hz,phi_rad,sigma_phi_rad
std::vector<phase::PhasePoint> phase_points_from_table(const CsvTable& table);
CsvTable lifetime_table(const std::vector<thermal::LifetimePoint>& points);  // T_K,tau_s,sigma_tau_s
std::vector<thermal::LifetimePoint> lifetime_points_from_table(const CsvTable& table);
CsvTable polar_table(const std::vector<polar::ContrastPoint>& points);  // theta_rad,R,sigma
std::vector<polar::ContrastPoint> polar_points_from_table(const CsvTable& table);

// Shared fit-report JSON: parameter names, values, sigmas, covariance,
// chi2, dof, convergence.
std::string fit_report_json(const fit::FitResult& result,
                            const std::vector<std::string>& param_names);

}  // namespace nvs::io

#endif
