#ifndef NVSINGLET_ODMR_HPP
#define NVSINGLET_ODMR_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "nvsinglet/exec.hpp"
#include "nvsinglet/rate_model.hpp"

namespace nvs::odmr {

// Spin-1 ground-state parameters. D, E, gamma defaults are the standard NV
// literature values; all are configurable inputs.
struct SpinSystemConfig {
  double d_splitting = 2.870e9;       // Hz, axial zero-field splitting
  double e_splitting = 0.0;           // Hz, transverse splitting
  double gamma = 2.8024e10;           // Hz/T
  Eigen::Vector3d b_field{0.0, 0.0, 0.0};  // T, lab frame
  double linewidth = 8.0e6;           // Hz, Lorentzian FWHM
  double contrast_vis = -0.05;        // peak fractional change per line, < 0
  double contrast_ir = 0.02;          // > 0
  std::array<Eigen::Vector3d, 4> orientations;  // unit vectors, lab frame

  SpinSystemConfig();
  void validate() const;
};

// The four <111> cube-diagonal NV orientations (unit vectors, lab frame).
const std::array<Eigen::Vector3d, 4>& nv_orientations();

struct ResonanceLine {
  double frequency = 0.0;  // Hz
  int orientation = 0;     // index into nv_orientations()
  int branch = 0;          // -1 = lower transition, +1 = upper
};

// Spin-1 Hamiltonian per orientation in the traceless convention
// H = D (Sz^2 - 2/3) + E (Sx^2 - Sy^2) + gamma B.S, diagonalized exactly.
// Returns the two transitions from the mostly-|0> eigenstate for each
// orientation; 8 lines total, sorted ascending in frequency.
std::vector<ResonanceLine> resonance_frequencies(const SpinSystemConfig& config);

// The 3x3 Hamiltonian for one orientation, in Hz (basis |+1>, |0>, |-1>).
Eigen::Matrix3cd spin_hamiltonian(const SpinSystemConfig& config,
                                  const Eigen::Vector3d& orientation);

struct OdmrSpectrum {
  std::vector<double> frequency;  // Hz
  std::vector<double> visible;    // normalized, <= 1
  std::vector<double> ir;         // normalized, >= 1
  std::vector<ResonanceLine> lines;
};

// visible(f) = 1 + contrast_vis * sum_k w_k L_k(f), ir likewise with
// contrast_ir; L a unit-peak Lorentzian. line_weights empty = all 1.
OdmrSpectrum spectrum(const SpinSystemConfig& config, const std::vector<double>& grid,
                      const std::vector<double>& line_weights = {},
                      Exec exec = Exec::Parallel);

// Steady-state fractional signal changes when a fraction mw_transfer of the
// on-resonance G0 population is driven to G+-1 (modeled as an added
// G0 <-> G+-1 mixing rate). Returns (vis_contrast, ir_contrast).
std::pair<double, double> contrast_from_rates(const rate::RateConfig& config, double mw_transfer);

}  // namespace nvs::odmr

#endif
