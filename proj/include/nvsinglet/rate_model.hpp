#ifndef NVSINGLET_RATE_MODEL_HPP
#define NVSINGLET_RATE_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nvsinglet/ode.hpp"

namespace nvs::rate {

using ode::Vector6d;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Lumped levels of the seven-level optical cycle: the ms=+1 and ms=-1
// sublevels are merged into a single level for both the ground and the
// excited triplet.
enum Level : int { G0 = 0, G1 = 1, E0 = 2, E1 = 3, US = 4, MS = 5 };
constexpr int kNumLevels = 6;

// All rates in 1/s. Defaults encode the measured lifetimes: visible decay
// 10.0 ns for the ms=0 branch, 7.8 ns total for ms=+-1 (the difference taken
// up by intersystem crossing), upper-singlet lifetime 0.9 ns, metastable
// singlet 219 ns at room temperature. Branching ratios and the radiative
// fraction of the upper singlet are model defaults, tune via config.
struct RateConfig {
  double pump_rate = 0.0;                    // ground -> excited, spin conserving
  double rate_E0_total = 1.0 / 10.0e-9;      // total 3E decay, ms=0 branch
  double rate_E1_total = 1.0 / 7.8e-9;       // total 3E decay, ms=+-1 branch
  double isc_E0_to_US = 0.0;
  double isc_E1_to_US = 1.0 / 7.8e-9 - 1.0 / 10.0e-9;
  double us_total_rate = 1.0 / 0.9e-9;
  double us_radiative_fraction = 1.5e-3;
  double ms_total_rate = 1.0 / 219.0e-9;     // may be supplied by the thermal module
  double ms_branch_to_G0 = 0.8;
  double g_spin_relax = 0.0;                 // ground-state T1 mixing

  // Throws validation_error naming the offending key.
  void validate() const;
};

// The documented default operating point used by the CLI and the contrast /
// intensity-ratio analyses: continuous weak pump with enough ground-state
// mixing to sustain the singlet cycle.
RateConfig default_nv_config();

struct RateMatrix {
  Matrix6d m;  // dP/dt = m * P; columns sum to zero
};

struct PopulationTrace {
  std::vector<double> times;
  std::vector<Vector6d> populations;
  std::vector<double> visible_rate;  // photons/s per NV
  std::vector<double> ir_rate;
};

// Builds the generator matrix of the lumped six-level system.
RateMatrix build_rate_matrix(const RateConfig& config);

// Integrates dP/dt = M(t) P, sampling at n_samples uniform times in (0, t_end].
// matrix_provider is evaluated at the integrator's internal times.
PopulationTrace evolve(const std::function<RateMatrix(double)>& matrix_provider,
                       const Vector6d& p0, double t_end, int n_samples,
                       const ode::StepControl& ctrl = {});

// Convenience: constant-config evolution, with emission rates filled in.
PopulationTrace evolve(const RateConfig& config, const Vector6d& p0, double t_end,
                       int n_samples, const ode::StepControl& ctrl = {});

// Unique stationary distribution from the bordered linear system.
// Throws numeric_error if the steady state is non-unique (e.g. zero pump and
// zero mixing).
Vector6d steady_state(const RateMatrix& matrix);

// (visible, ir) photon rates for a population vector.
std::pair<double, double> emission_rates(const Vector6d& populations, const RateConfig& config);

}  // namespace nvs::rate

#endif
