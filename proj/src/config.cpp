#include "nvsinglet/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nvsinglet/errors.hpp"

namespace nvs::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& section, const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw validation_error("config [" + section + "] " + key + ": not a number: '" + v + "'");
  }
}

int parse_int(const std::string& section, const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return i;
  } catch (const std::exception&) {
    throw validation_error("config [" + section + "] " + key + ": not an integer: '" + v + "'");
  }
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw validation_error("config [" + section + "] " + key + ": not a boolean: '" + v + "'");
}

Eigen::Vector3d parse_vec3(const std::string& section, const std::string& key,
                           const std::string& v) {
  std::stringstream ss(v);
  std::string part;
  std::vector<double> vals;
  while (std::getline(ss, part, ','))
    vals.push_back(parse_double(section, key, trim(part)));
  if (vals.size() != 3)
    throw validation_error("config [" + section + "] " + key + ": expected 3 components");
  return {vals[0], vals[1], vals[2]};
}

// Modes as "epsilon_eV:degeneracy" comma-separated pairs.
std::vector<thermal::PhononMode> parse_modes(const std::string& section, const std::string& key,
                                             const std::string& v) {
  std::vector<thermal::PhononMode> modes;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto colon = part.find(':');
    thermal::PhononMode m;
    if (colon == std::string::npos) {
      m.epsilon = parse_double(section, key, part);
      m.degeneracy = 1;
    } else {
      m.epsilon = parse_double(section, key, trim(part.substr(0, colon)));
      m.degeneracy = parse_int(section, key, trim(part.substr(colon + 1)));
    }
    modes.push_back(m);
  }
  return modes;
}

}  // namespace

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw validation_error("config line " + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      kv.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw validation_error("config line " + std::to_string(lineno) + ": empty key");
    kv.sections[section][key] = value;
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("config: cannot open file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

void KeyValueFile::set(const std::string& section, const std::string& key,
                       const std::string& value) {
  sections[section][key] = value;
}

namespace {

void apply_rate(rate::RateConfig& c, const std::string& key, const std::string& v) {
  const std::string s = "rate";
  if (key == "pump_rate") c.pump_rate = parse_double(s, key, v);
  else if (key == "rate_E0_total") c.rate_E0_total = parse_double(s, key, v);
  else if (key == "rate_E1_total") c.rate_E1_total = parse_double(s, key, v);
  else if (key == "isc_E0_to_US") c.isc_E0_to_US = parse_double(s, key, v);
  else if (key == "isc_E1_to_US") c.isc_E1_to_US = parse_double(s, key, v);
  else if (key == "us_total_rate") c.us_total_rate = parse_double(s, key, v);
  else if (key == "us_radiative_fraction") c.us_radiative_fraction = parse_double(s, key, v);
  else if (key == "ms_total_rate") c.ms_total_rate = parse_double(s, key, v);
  else if (key == "ms_branch_to_G0") c.ms_branch_to_G0 = parse_double(s, key, v);
  else if (key == "g_spin_relax") c.g_spin_relax = parse_double(s, key, v);
  else throw validation_error("config [rate]: unknown key '" + key + "'");
}

void apply_phase(PhaseScanSettings& p, const std::string& key, const std::string& v) {
  const std::string s = "phase";
  if (key == "f_min") p.f_min = parse_double(s, key, v);
  else if (key == "f_max") p.f_max = parse_double(s, key, v);
  else if (key == "n_freq") p.n_freq = parse_int(s, key, v);
  else if (key == "mod_depth") p.modulation.mod_depth = parse_double(s, key, v);
  else if (key == "n_periods") p.modulation.n_periods = parse_int(s, key, v);
  else if (key == "samples_per_period") p.modulation.samples_per_period = parse_int(s, key, v);
  else if (key == "fit_delay") p.fit_delay = parse_bool(s, key, v);
  else if (key == "phase_noise_deg")
    p.phase_noise_rad = parse_double(s, key, v) * std::numbers::pi / 180.0;
  else if (key == "channel") {
    if (v == "visible") p.channel = phase::Channel::Visible;
    else if (v == "ir") p.channel = phase::Channel::Ir;
    else throw validation_error("config [phase] channel: expected visible|ir");
  } else if (key == "model") {
    if (v == "single") p.model = phase::DecayKind::Single;
    else if (v == "cascade") p.model = phase::DecayKind::Cascade;
    else throw validation_error("config [phase] model: expected single|cascade");
  } else if (key == "fix_tau1") {
    if (v == "free" || v.empty()) p.fix_tau1.reset();
    else p.fix_tau1 = parse_double(s, key, v);
  } else {
    throw validation_error("config [phase]: unknown key '" + key + "'");
  }
}

void apply_thermal(ThermalSettings& t, const std::string& key, const std::string& v) {
  const std::string s = "thermal";
  if (key == "tau0") t.model.tau0 = parse_double(s, key, v);
  else if (key == "modes") t.model.modes = parse_modes(s, key, v);
  else if (key == "t_min") t.t_min = parse_double(s, key, v);
  else if (key == "t_max") t.t_max = parse_double(s, key, v);
  else if (key == "n_points") t.n_points = parse_int(s, key, v);
  else if (key == "noise_frac") t.noise_frac = parse_double(s, key, v);
  else if (key == "fit_structure") t.fit_structure = v;
  else throw validation_error("config [thermal]: unknown key '" + key + "'");
}

void apply_spin(OdmrSettings& o, const std::string& key, const std::string& v) {
  const std::string s = "spin";
  if (key == "d") o.spin.d_splitting = parse_double(s, key, v);
  else if (key == "e") o.spin.e_splitting = parse_double(s, key, v);
  else if (key == "gamma") o.spin.gamma = parse_double(s, key, v);
  else if (key == "b_field") o.spin.b_field = parse_vec3(s, key, v);
  else if (key == "linewidth") o.spin.linewidth = parse_double(s, key, v);
  else if (key == "contrast_vis") o.spin.contrast_vis = parse_double(s, key, v);
  else if (key == "contrast_ir") o.spin.contrast_ir = parse_double(s, key, v);
  else throw validation_error("config [spin]: unknown key '" + key + "'");
}

void apply_odmr(OdmrSettings& o, const std::string& key, const std::string& v) {
  const std::string s = "odmr";
  if (key == "f_min") o.f_min = parse_double(s, key, v);
  else if (key == "f_max") o.f_max = parse_double(s, key, v);
  else if (key == "n_points") o.n_points = parse_int(s, key, v);
  else if (key == "mw_transfer") o.mw_transfer = parse_double(s, key, v);
  else throw validation_error("config [odmr]: unknown key '" + key + "'");
}

void apply_polar(PolarSettings& p, const std::string& key, const std::string& v) {
  const std::string s = "polar";
  if (key == "nv_axis") p.geometry.nv_axis = parse_vec3(s, key, v).normalized();
  else if (key == "k") p.geometry.propagation = parse_vec3(s, key, v).normalized();
  else if (key == "floor_c") p.floor_c = parse_double(s, key, v);
  else if (key == "n_theta") p.n_theta = parse_int(s, key, v);
  else if (key == "noise") p.noise = parse_double(s, key, v);
  else throw validation_error("config [polar]: unknown key '" + key + "'");
}

void apply_sim(SimSettings& s_, const std::string& key, const std::string& v) {
  const std::string s = "sim";
  if (key == "t_end") s_.t_end = parse_double(s, key, v);
  else if (key == "n_samples") s_.n_samples = parse_int(s, key, v);
  else if (key == "pump_on_time") s_.pump_on_time = parse_double(s, key, v);
  else if (key == "pump_waveform") {
    if (v != "const" && v != "square")
      throw validation_error("config [sim] pump_waveform: expected const|square");
    s_.pump_waveform = v;
  } else {
    throw validation_error("config [sim]: unknown key '" + key + "'");
  }
}

}  // namespace

RunConfig RunConfig::from_kv(const KeyValueFile& kv) {
  RunConfig rc;
  for (const auto& [section, entries] : kv.sections) {
    for (const auto& [key, value] : entries) {
      if (section == "rate") apply_rate(rc.rate, key, value);
      else if (section == "phase") apply_phase(rc.phase, key, value);
      else if (section == "thermal") apply_thermal(rc.thermal, key, value);
      else if (section == "spin") apply_spin(rc.odmr, key, value);
      else if (section == "odmr") apply_odmr(rc.odmr, key, value);
      else if (section == "polar") apply_polar(rc.polar, key, value);
      else if (section == "sim") apply_sim(rc.sim, key, value);
      else throw validation_error("config: unknown section [" + section + "]");
    }
  }
  rc.validate();
  return rc;
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_kv(KeyValueFile::parse_file(path));
}

void RunConfig::apply_override(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos)
    throw validation_error("override '" + dotted_key + "': expected section.key=value");
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  if (section == "rate") apply_rate(rate, key, value);
  else if (section == "phase") apply_phase(phase, key, value);
  else if (section == "thermal") apply_thermal(thermal, key, value);
  else if (section == "spin") apply_spin(odmr, key, value);
  else if (section == "odmr") apply_odmr(odmr, key, value);
  else if (section == "polar") apply_polar(polar, key, value);
  else if (section == "sim") apply_sim(sim, key, value);
  else throw validation_error("override: unknown section '" + section + "'");
  validate();
}

void RunConfig::validate() const {
  rate.validate();
  thermal.model.validate();
  odmr.spin.validate();
  polar.geometry.validate();
  if (phase.f_min <= 0.0 || phase.f_max < phase.f_min)
    throw validation_error("config [phase]: need 0 < f_min <= f_max");
  if (phase.n_freq < 0) throw validation_error("config [phase] n_freq: must be >= 0");
  if (thermal.n_points < 0) throw validation_error("config [thermal] n_points: must be >= 0");
  if (odmr.n_points < 0) throw validation_error("config [odmr] n_points: must be >= 0");
  if (polar.n_theta < 0) throw validation_error("config [polar] n_theta: must be >= 0");
  if (polar.floor_c < 0.0 || polar.floor_c >= 1.0 + 1e-12)
    throw validation_error("config [polar] floor_c: must be in [0,1]");
  if (sim.t_end < 0.0) throw validation_error("config [sim] t_end: must be >= 0");
  if (sim.n_samples < 0) throw validation_error("config [sim] n_samples: must be >= 0");
}

std::string rate_config_to_string(const rate::RateConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "[rate]\n"
      << "pump_rate = " << c.pump_rate << "\n"
      << "rate_E0_total = " << c.rate_E0_total << "\n"
      << "rate_E1_total = " << c.rate_E1_total << "\n"
      << "isc_E0_to_US = " << c.isc_E0_to_US << "\n"
      << "isc_E1_to_US = " << c.isc_E1_to_US << "\n"
      << "us_total_rate = " << c.us_total_rate << "\n"
      << "us_radiative_fraction = " << c.us_radiative_fraction << "\n"
      << "ms_total_rate = " << c.ms_total_rate << "\n"
      << "ms_branch_to_G0 = " << c.ms_branch_to_G0 << "\n"
      << "g_spin_relax = " << c.g_spin_relax << "\n";
  return out.str();
}

rate::RateConfig rate_config_from_string(const std::string& text) {
  const KeyValueFile kv = KeyValueFile::parse_string(text);
  rate::RateConfig c;
  for (const auto& [section, entries] : kv.sections) {
    if (section != "rate")
      throw validation_error("rate config: unexpected section [" + section + "]");
    for (const auto& [key, value] : entries) apply_rate(c, key, value);
  }
  c.validate();
  return c;
}

}  // namespace nvs::config
