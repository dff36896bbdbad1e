// nvtool: command-line front end for the NV singlet photodynamics toolkit.
// Subcommands cover trace simulation, phase-shift lifetime scans and fits,
// thermal lifetime curves and fits, ODMR spectra, and polarization scans.
// Exit codes: 0 success, 2 validation error, 3 numeric failure.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "nvsinglet/config.hpp"
#include "nvsinglet/errors.hpp"
#include "nvsinglet/io.hpp"
#include "nvsinglet/odmr.hpp"
#include "nvsinglet/phase_shift.hpp"
#include "nvsinglet/polarization.hpp"
#include "nvsinglet/rate_model.hpp"
#include "nvsinglet/thermal.hpp"

namespace {

using namespace nvs;

struct CommonArgs {
  std::string config_path;
  std::string out_path = "-";
  std::string dataset_path;
  unsigned seed = 1;
  std::string format = "csv";
  std::vector<std::string> overrides;
};

config::RunConfig load_config(const CommonArgs& args) {
  config::RunConfig rc;
  if (!args.config_path.empty()) rc = config::RunConfig::from_file(args.config_path);
  for (const std::string& ov : args.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw validation_error("--set expects section.key=value, got '" + ov + "'");
    rc.apply_override(ov.substr(0, eq), ov.substr(eq + 1));
  }
  return rc;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open output file '" + path + "'");
  out << text;
}

// Sidecar path for the JSON companion of a CSV output.
std::string sidecar(const std::string& path, const std::string& suffix) {
  if (path == "-") return "-";
  std::filesystem::path p(path);
  p.replace_extension("");
  return p.string() + suffix;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

int cmd_simulate_trace(const CommonArgs& args) {
  const config::RunConfig rc = load_config(args);
  const rate::RateConfig& cfg = rc.rate;

  rate::PopulationTrace trace;
  if (rc.sim.t_end > 0.0 && rc.sim.n_samples > 0) {
    rate::Vector6d p0 = rate::Vector6d::Zero();
    if (rc.sim.pump_waveform == "const") {
      p0[rate::G0] = 1.0;
      trace = rate::evolve(cfg, p0, rc.sim.t_end, rc.sim.n_samples);
    } else {
      // Square pulse: pump on until pump_on_time, then off.
      p0[rate::G0] = 1.0;
      const rate::RateMatrix m_on = rate::build_rate_matrix(cfg);
      rate::RateConfig off = cfg;
      off.pump_rate = 0.0;
      const rate::RateMatrix m_off = rate::build_rate_matrix(off);
      const double t_on = rc.sim.pump_on_time;
      trace = rate::evolve(
          [&](double t) { return t < t_on ? m_on : m_off; }, p0, rc.sim.t_end, rc.sim.n_samples);
      for (size_t i = 0; i < trace.times.size(); ++i) {
        const auto [vis, ir] = rate::emission_rates(trace.populations[i], cfg);
        trace.visible_rate.push_back(vis);
        trace.ir_rate.push_back(ir);
      }
    }
  }
  write_text(args.out_path, io::to_csv(io::trace_table(trace)));
  return 0;
}

int cmd_phase_scan(const CommonArgs& args, bool fit) {
  const config::RunConfig rc = load_config(args);
  const config::PhaseScanSettings& ps = rc.phase;
  if (ps.n_freq == 0) throw validation_error("phase scan: empty frequency list (n_freq = 0)");

  std::vector<phase::PhasePoint> points;
  if (!args.dataset_path.empty()) {
    points = io::phase_points_from_table(io::read_csv(args.dataset_path));
  } else {
    const std::vector<double> freqs = log_spaced(ps.f_min, ps.f_max, ps.n_freq);
    points = phase::phase_scan(rc.rate, freqs, ps.channel, ps.modulation);
    if (ps.phase_noise_rad > 0.0) {
      std::mt19937 rng(args.seed);
      std::normal_distribution<double> noise(0.0, ps.phase_noise_rad);
      for (auto& p : points) {
        p.phi += noise(rng);
        p.sigma_phi = std::max(p.sigma_phi, ps.phase_noise_rad);
      }
    }
  }
  write_text(args.out_path, io::to_csv(io::phase_table(points)));

  if (fit) {
    phase::LifetimeFitOptions opt;
    if (ps.model == phase::DecayKind::Cascade) opt.fixed_tau1 = ps.fix_tau1;
    opt.fit_delay = ps.fit_delay;
    const fit::FitResult result = phase::fit_lifetimes(points, ps.model, opt);
    std::vector<std::string> names;
    if (ps.model == phase::DecayKind::Single) names = {"tau"};
    else if (opt.fixed_tau1) names = {"tau0"};
    else names = {"tau1", "tau0"};
    if (ps.fit_delay) names.push_back("delay");
    write_text(sidecar(args.out_path, "_fit.json"), io::fit_report_json(result, names));
  }
  return 0;
}

int cmd_thermal_curve(const CommonArgs& args) {
  const config::RunConfig rc = load_config(args);
  const config::ThermalSettings& ts = rc.thermal;
  if (ts.n_points < 1) throw validation_error("thermal curve: n_points must be >= 1");

  std::vector<thermal::LifetimePoint> points;
  std::mt19937 rng(args.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < ts.n_points; ++i) {
    const double t = ts.n_points == 1
                         ? ts.t_min
                         : ts.t_min * std::pow(ts.t_max / ts.t_min,
                                               static_cast<double>(i) / (ts.n_points - 1));
    thermal::LifetimePoint p;
    p.temperature = t;
    p.tau = thermal::lifetime_at(ts.model, t);
    if (ts.noise_frac > 0.0) {
      p.sigma_tau = ts.noise_frac * p.tau;
      p.tau += p.sigma_tau * noise(rng);
    }
    points.push_back(p);
  }
  write_text(args.out_path, io::to_csv(io::lifetime_table(points)));
  return 0;
}

int cmd_fit_thermal(const CommonArgs& args) {
  const config::RunConfig rc = load_config(args);
  const config::ThermalSettings& ts = rc.thermal;
  if (args.dataset_path.empty())
    throw validation_error("fit-thermal: --data PATH is required");
  const std::vector<thermal::LifetimePoint> points =
      io::lifetime_points_from_table(io::read_csv(args.dataset_path));

  // fit_structure: "free:N" or "fixed:e1,e2,...:cap"
  const std::string& fs = ts.fit_structure;
  nlohmann::json j;
  if (fs.rfind("free:", 0) == 0) {
    const int n_modes = std::stoi(fs.substr(5));
    const thermal::ThermalFitResult result = thermal::fit_thermal_free(points, n_modes);
    std::vector<std::string> names = {"tau0"};
    for (int i = 0; i < n_modes; ++i) names.push_back("epsilon_" + std::to_string(i + 1));
    write_text(args.out_path, io::fit_report_json(result.fit, names));
  } else if (fs.rfind("fixed:", 0) == 0) {
    const auto second = fs.find(':', 6);
    if (second == std::string::npos)
      throw validation_error("fit_structure: expected fixed:e1,e2:cap");
    std::vector<double> energies;
    std::stringstream ss(fs.substr(6, second - 6));
    std::string part;
    while (std::getline(ss, part, ',')) energies.push_back(std::stod(part));
    const int cap = std::stoi(fs.substr(second + 1));
    const thermal::DegeneracySearchResult result =
        thermal::fit_thermal_degeneracies(points, energies, cap);
    j["degeneracies"] = result.degeneracies;
    j["chi2"] = result.chi2;
    j["tau0"] = result.model.tau0;
    j["tau0_sigma"] = result.fit.sigma_available ? result.fit.sigma[0] : 0.0;
    j["energies_ev"] = energies;
    write_text(args.out_path, j.dump(2) + "\n");
  } else {
    throw validation_error("fit_structure: expected 'free:N' or 'fixed:e1,e2:cap'");
  }
  return 0;
}

int cmd_odmr_spectrum(const CommonArgs& args) {
  const config::RunConfig rc = load_config(args);
  const config::OdmrSettings& os = rc.odmr;
  if (os.n_points < 2) throw validation_error("odmr: n_points must be >= 2");

  std::vector<double> grid(os.n_points);
  for (int i = 0; i < os.n_points; ++i)
    grid[i] = os.f_min + (os.f_max - os.f_min) * i / (os.n_points - 1);
  const odmr::OdmrSpectrum spec = odmr::spectrum(os.spin, grid);

  io::CsvTable t;
  t.header = {"f_hz", "visible", "ir"};
  for (int i = 0; i < os.n_points; ++i)
    t.rows.push_back({spec.frequency[i], spec.visible[i], spec.ir[i]});
  write_text(args.out_path, io::to_csv(t));

  nlohmann::json lines = nlohmann::json::array();
  for (const auto& line : spec.lines) {
    nlohmann::json l;
    l["frequency_hz"] = line.frequency;
    l["orientation"] = line.orientation;
    l["branch"] = line.branch;
    lines.push_back(l);
  }
  const auto [vis_c, ir_c] = odmr::contrast_from_rates(rc.rate, os.mw_transfer);
  nlohmann::json j;
  j["lines"] = lines;
  j["vis_contrast"] = vis_c;
  j["ir_contrast"] = ir_c;
  write_text(sidecar(args.out_path, "_lines.json"), j.dump(2) + "\n");
  return 0;
}

int cmd_polar_scan(const CommonArgs& args, bool do_fit) {
  const config::RunConfig rc = load_config(args);
  const config::PolarSettings& ps = rc.polar;
  if (ps.n_theta < 5) throw validation_error("polar scan: n_theta must be >= 5");

  std::vector<double> thetas(ps.n_theta);
  for (int i = 0; i < ps.n_theta; ++i)
    thetas[i] = 2.0 * std::numbers::pi * i / ps.n_theta;
  const std::set<polar::Axis> axes = polar::allowed_axes(polar::Irrep::E, polar::Irrep::A1);
  std::vector<polar::ContrastPoint> points =
      polar::contrast_curve(axes, ps.geometry, thetas, ps.floor_c);
  if (ps.noise > 0.0) {
    std::mt19937 rng(args.seed);
    std::normal_distribution<double> noise(0.0, ps.noise);
    for (auto& p : points) {
      p.r += noise(rng);
      p.sigma = ps.noise;
    }
  }
  write_text(args.out_path, io::to_csv(io::polar_table(points)));

  if (do_fit) {
    const polar::PolarizationFit result = polar::fit_polarization(points);
    nlohmann::json j;
    j["amplitude"] = result.amplitude;
    j["phi_nv_rad"] = result.phi_nv;
    j["phi_nv_deg"] = result.phi_nv * 180.0 / std::numbers::pi;
    j["offset"] = result.offset;
    j["chi2"] = result.fit.chi2;
    j["chi2_constant"] = result.chi2_constant;
    j["sin2_preferred"] = result.sin2_preferred;
    write_text(sidecar(args.out_path, "_fit.json"), j.dump(2) + "\n");
  }
  return 0;
}

int cmd_selection_rules(const CommonArgs& args) {
  using polar::Irrep;
  const std::vector<std::pair<std::string, Irrep>> irreps = {
      {"A1", Irrep::A1}, {"A2", Irrep::A2}, {"E", Irrep::E}};
  nlohmann::json j = nlohmann::json::array();
  for (size_t a = 0; a < irreps.size(); ++a) {
    for (size_t b = a; b < irreps.size(); ++b) {
      const auto axes = polar::allowed_axes(irreps[a].second, irreps[b].second);
      nlohmann::json entry;
      entry["upper"] = irreps[a].first;
      entry["lower"] = irreps[b].first;
      nlohmann::json ax = nlohmann::json::array();
      for (polar::Axis x : axes)
        ax.push_back(x == polar::Axis::X ? "x" : (x == polar::Axis::Y ? "y" : "z"));
      entry["axes"] = ax;
      j.push_back(entry);
    }
  }
  write_text(args.out_path, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV singlet photodynamics toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* sub, bool with_data = false) {
    sub->add_option("--config", args.config_path, "config file (key = value sections)");
    sub->add_option("--out", args.out_path, "output path ('-' = stdout)");
    sub->add_option("--seed", args.seed, "seed for synthetic noise");
    sub->add_option("--format", args.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", args.overrides, "override section.key=value")->take_all();
    if (with_data) sub->add_option("--data", args.dataset_path, "input dataset CSV");
  };

  auto* simulate = app.add_subcommand("simulate-trace", "rate-equation population trace");
  add_common(simulate);
  auto* pscan = app.add_subcommand("phase-scan", "phase shift vs modulation frequency");
  add_common(pscan, true);
  auto* pfit = app.add_subcommand("fit-phase", "phase scan plus lifetime fit");
  add_common(pfit, true);
  auto* tcurve = app.add_subcommand("thermal-curve", "MS lifetime vs temperature");
  add_common(tcurve);
  auto* tfit = app.add_subcommand("fit-thermal", "fit lifetime dataset to the phonon model");
  add_common(tfit, true);
  auto* ospec = app.add_subcommand("odmr-spectrum", "magnetic-resonance spectra");
  add_common(ospec);
  auto* polarscan = app.add_subcommand("polar-scan", "polarization contrast curve and fit");
  add_common(polarscan);
  auto* rules = app.add_subcommand("selection-rules", "C3v selection-rule table");
  add_common(rules);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate_trace(args);
    if (pscan->parsed()) return cmd_phase_scan(args, false);
    if (pfit->parsed()) return cmd_phase_scan(args, true);
    if (tcurve->parsed()) return cmd_thermal_curve(args);
    if (tfit->parsed()) return cmd_fit_thermal(args);
    if (ospec->parsed()) return cmd_odmr_spectrum(args);
    if (polarscan->parsed()) return cmd_polar_scan(args, true);
    if (rules->parsed()) return cmd_selection_rules(args);
  } catch (const nvs::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const nvs::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
