#ifndef NVSINGLET_CONFIG_HPP
#define NVSINGLET_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvsinglet/odmr.hpp"
#include "nvsinglet/phase_shift.hpp"
#include "nvsinglet/polarization.hpp"
#include "nvsinglet/rate_model.hpp"
#include "nvsinglet/thermal.hpp"

namespace nvs::config {

// Simple sectioned key = value text format ('#' comments). Unknown sections
// or keys are rejected with a validation_error naming them.
struct KeyValueFile {
  // section -> key -> raw value string
  std::map<std::string, std::map<std::string, std::string>> sections;

  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text);
  void set(const std::string& section, const std::string& key, const std::string& value);
};

struct PhaseScanSettings {
  double f_min = 1.0e6;
  double f_max = 1.0e8;
  int n_freq = 20;
  phase::Channel channel = phase::Channel::Ir;
  phase::DecayKind model = phase::DecayKind::Cascade;
  std::optional<double> fix_tau1 = 7.8e-9;
  bool fit_delay = false;
  phase::ModulationOptions modulation;
  double phase_noise_rad = 0.0;  // synthetic noise, uses the global seed
};

struct ThermalSettings {
  thermal::ThermalModel model;
  double t_min = 4.4;
  double t_max = 450.0;
  int n_points = 24;
  double noise_frac = 0.0;
  // Fit structure: "free:N" or "fixed:e1,e2,...:cap"
  std::string fit_structure = "free:1";
};

struct OdmrSettings {
  odmr::SpinSystemConfig spin;
  double f_min = 2.6e9;
  double f_max = 3.15e9;
  int n_points = 1101;
  double mw_transfer = 1.0;
};

struct PolarSettings {
  polar::PolarizationGeometry geometry;
  double floor_c = 0.2;
  int n_theta = 36;
  double noise = 0.0;
};

struct SimSettings {
  double t_end = 2.0e-6;
  int n_samples = 400;
  std::string pump_waveform = "const";  // const | square
  double pump_on_time = 1.0e-6;         // square: pump switches off here
};

// Merged run configuration with per-module validation.
struct RunConfig {
  rate::RateConfig rate = rate::default_nv_config();
  PhaseScanSettings phase;
  ThermalSettings thermal;
  OdmrSettings odmr;
  PolarSettings polar;
  SimSettings sim;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_kv(const KeyValueFile& kv);
  void apply_override(const std::string& dotted_key, const std::string& value);
  void validate() const;
};

// RateConfig round-trip through the shared key = value format.
std::string rate_config_to_string(const rate::RateConfig& c);
rate::RateConfig rate_config_from_string(const std::string& text);

}  // namespace nvs::config

#endif
