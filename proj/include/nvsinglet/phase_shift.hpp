#ifndef NVSINGLET_PHASE_SHIFT_HPP
#define NVSINGLET_PHASE_SHIFT_HPP

#include <optional>
#include <vector>

#include "nvsinglet/exec.hpp"
#include "nvsinglet/fit.hpp"
#include "nvsinglet/rate_model.hpp"

namespace nvs::phase {

struct PhasePoint {
  double f = 0.0;          // modulation frequency, Hz
  double phi = 0.0;        // radians
  double sigma_phi = 0.0;  // radians, >= 0
};

enum class DecayKind { Single, Cascade };
enum class Channel { Visible, Ir };

// phi = arctan(2 pi f tau), single-exponential decay.
double phase_single(double f, double tau);

// Cascade through two levels; reported on [0, pi) via the sum-of-arctans
// branch, which avoids the pole of the quotient form at (2 pi f)^2 t1 t0 = 1.
double phase_cascade(double f, double tau1, double tau0);

struct ModulationOptions {
  double mod_depth = 0.05;
  int n_periods = 16;          // first half discarded as transient
  int samples_per_period = 64;
  ode::StepControl ode_ctrl;
};

struct ModulatedResponse {
  double frequency = 0.0;
  std::vector<double> times;
  std::vector<double> pump;     // reference channel
  std::vector<double> visible;
  std::vector<double> ir;
};

// Drives the rate model with pump_rate * (1 + mod_depth sin(2 pi f t)),
// starting from the unmodulated steady state. Returns the retained
// (post-transient) portion of the series.
ModulatedResponse simulate_modulated_response(const rate::RateConfig& config, double f,
                                              const ModulationOptions& opt = {});

// Fits A sin(2 pi f t + psi) + B to both series by linear least squares on
// the sin/cos quadrature basis; phi = psi_ref - psi_sig wrapped to [0, pi).
// Throws numeric_error on a degenerate (zero-amplitude) fit.
PhasePoint extract_phase(const std::vector<double>& times, const std::vector<double>& reference,
                         const std::vector<double>& signal, double f);

// Full frequency scan through the ODE path. Serial and Parallel (OpenMP)
// policies produce identical results.
std::vector<PhasePoint> phase_scan(const rate::RateConfig& config,
                                   const std::vector<double>& frequencies, Channel channel,
                                   const ModulationOptions& opt = {},
                                   Exec exec = Exec::Parallel);

struct LifetimeFitOptions {
  std::optional<double> fixed_tau1;        // Cascade only
  bool fit_delay = false;                  // detection-chain time offset
  std::optional<std::vector<double>> initial_guess;
};

// Weighted least squares of the analytic phase formula. Parameter order:
// Single -> [tau]; Cascade -> [tau1, tau0] (or [tau0] with fixed_tau1);
// the delay parameter, when fitted, is appended last.
fit::FitResult fit_lifetimes(const std::vector<PhasePoint>& points, DecayKind kind,
                             const LifetimeFitOptions& opt = {});

}  // namespace nvs::phase

#endif
