#include "nvsinglet/io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nvsinglet/errors.hpp"

namespace nvs::io {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw validation_error("CSV: missing column '" + name + "'");
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

CsvTable from_csv_string(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw validation_error("CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw validation_error("CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != table.header.size())
      throw validation_error("CSV line " + std::to_string(lineno) + ": column count mismatch");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw validation_error("CSV: cannot open '" + path + "' for writing");
  out << to_csv(table);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("CSV: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_csv_string(buf.str());
}

CsvTable trace_table(const rate::PopulationTrace& trace) {
  CsvTable t;
  t.header = {"t_s", "pG0", "pG1", "pE0", "pE1", "pUS", "pMS", "visible_rate", "ir_rate"};
  for (size_t i = 0; i < trace.times.size(); ++i) {
    const auto& p = trace.populations[i];
    const double vis = i < trace.visible_rate.size() ? trace.visible_rate[i] : 0.0;
    const double ir = i < trace.ir_rate.size() ? trace.ir_rate[i] : 0.0;
    t.rows.push_back({trace.times[i], p[0], p[1], p[2], p[3], p[4], p[5], vis, ir});
  }
  return t;
}

CsvTable phase_table(const std::vector<phase::PhasePoint>& points) {
  CsvTable t;
  t.header = {"f_hz", "phi_rad", "sigma_phi_rad"};
  for (const auto& p : points) t.rows.push_back({p.f, p.phi, p.sigma_phi});
  return t;
}

std::vector<phase::PhasePoint> phase_points_from_table(const CsvTable& table) {
  const int cf = table.column("f_hz"), cp = table.column("phi_rad"), cs = table.column("sigma_phi_rad");
  std::vector<phase::PhasePoint> out;
  for (const auto& row : table.rows) out.push_back({row[cf], row[cp], row[cs]});
  return out;
}

CsvTable lifetime_table(const std::vector<thermal::LifetimePoint>& points) {
  CsvTable t;
  t.header = {"T_K", "tau_s", "sigma_tau_s"};
  for (const auto& p : points) t.rows.push_back({p.temperature, p.tau, p.sigma_tau});
  return t;
}

std::vector<thermal::LifetimePoint> lifetime_points_from_table(const CsvTable& table) {
  const int ct = table.column("T_K"), cl = table.column("tau_s"), cs = table.column("sigma_tau_s");
  std::vector<thermal::LifetimePoint> out;
  for (const auto& row : table.rows) out.push_back({row[ct], row[cl], row[cs]});
  return out;
}

CsvTable polar_table(const std::vector<polar::ContrastPoint>& points) {
  CsvTable t;
  t.header = {"theta_rad", "R", "sigma"};
  for (const auto& p : points) t.rows.push_back({p.theta, p.r, p.sigma});
  return t;
}

std::vector<polar::ContrastPoint> polar_points_from_table(const CsvTable& table) {
  const int ct = table.column("theta_rad"), cr = table.column("R"), cs = table.column("sigma");
  std::vector<polar::ContrastPoint> out;
  for (const auto& row : table.rows) out.push_back({row[ct], row[cr], row[cs]});
  return out;
}

std::string fit_report_json(const fit::FitResult& result,
                            const std::vector<std::string>& param_names) {
  nlohmann::json j;
  nlohmann::json params = nlohmann::json::array();
  for (int i = 0; i < result.params.size(); ++i) {
    nlohmann::json p;
    p["name"] = i < static_cast<int>(param_names.size()) ? param_names[i]
                                                         : "p" + std::to_string(i);
    p["value"] = result.params[i];
    p["sigma"] = result.sigma_available ? result.sigma[i] : 0.0;
    params.push_back(p);
  }
  j["parameters"] = params;
  nlohmann::json cov = nlohmann::json::array();
  for (int i = 0; i < result.covariance.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < result.covariance.cols(); ++k) row.push_back(result.covariance(i, k));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["chi2"] = result.chi2;
  j["dof"] = result.dof;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["sigma_available"] = result.sigma_available;
  return j.dump(2) + "\n";
}

}  // namespace nvs::io
