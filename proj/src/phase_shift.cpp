#include "nvsinglet/phase_shift.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include "nvsinglet/errors.hpp"

namespace nvs::phase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct QuadratureFit {
  double psi;      // phase of A sin(wt + psi)
  double amp2;     // A^2
  double var_psi;  // variance of psi from residuals
};

QuadratureFit fit_quadrature(const std::vector<double>& times, const std::vector<double>& y,
                             double f) {
  const int n = static_cast<int>(times.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double w = kTwoPi * f * times[i];
    x(i, 0) = std::sin(w);
    x(i, 1) = std::cos(w);
    x(i, 2) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Matrix3d xtx = x.transpose() * x;
  const Eigen::Vector3d coef = xtx.ldlt().solve(x.transpose() * b);
  const double a = coef[0], c = coef[1];
  const double amp2 = a * a + c * c;

  const Eigen::VectorXd resid = b - x * coef;
  const double s2 = n > 3 ? resid.squaredNorm() / (n - 3) : 0.0;
  const Eigen::Matrix3d cov = xtx.inverse() * s2;
  // psi = atan2(c, a); linear error propagation.
  const double var_psi =
      amp2 > 0.0
          ? (c * c * cov(0, 0) + a * a * cov(1, 1) - 2.0 * a * c * cov(0, 1)) / (amp2 * amp2)
          : 0.0;

  // Degenerate if the oscillation is lost in the fit noise or is negligible
  // against the overall data scale (e.g. a constant series).
  const double data_scale2 = b.squaredNorm() / std::max(n, 1);
  if (amp2 <= 9.0 * s2 * 2.0 / std::max(n, 1) || amp2 <= 1e-20 * data_scale2)
    throw numeric_error("extract_phase: degenerate fit (oscillation amplitude "
                        "indistinguishable from noise)");
  return {std::atan2(c, a), amp2, var_psi};
}

}  // namespace

double phase_single(double f, double tau) {
  if (f < 0.0) throw validation_error("phase_single: f must be >= 0");
  if (tau <= 0.0) throw validation_error("phase_single: tau must be > 0");
  return std::atan(kTwoPi * f * tau);
}

double phase_cascade(double f, double tau1, double tau0) {
  if (f < 0.0) throw validation_error("phase_cascade: f must be >= 0");
  if (tau1 <= 0.0 || tau0 <= 0.0) throw validation_error("phase_cascade: lifetimes must be > 0");
  return std::atan(kTwoPi * f * tau1) + std::atan(kTwoPi * f * tau0);
}

ModulatedResponse simulate_modulated_response(const rate::RateConfig& config, double f,
                                              const ModulationOptions& opt) {
  if (f <= 0.0) throw validation_error("simulate_modulated_response: f must be > 0");
  if (opt.mod_depth <= 0.0 || opt.mod_depth > 1.0)
    throw validation_error("simulate_modulated_response: mod_depth must be in (0,1]");
  if (opt.n_periods < 2 || opt.samples_per_period < 8)
    throw validation_error("simulate_modulated_response: need >= 2 periods and >= 8 samples/period");
  config.validate();

  // M(t) = M_base + pump(t) * M_pump; splitting avoids re-validating per step.
  rate::RateConfig base = config;
  base.pump_rate = 0.0;
  const rate::Matrix6d m_base = rate::build_rate_matrix(base).m;
  rate::RateConfig unit_pump;  // zero rates except unit pump
  unit_pump = rate::RateConfig{};
  unit_pump.pump_rate = 1.0;
  unit_pump.rate_E0_total = 0.0;
  unit_pump.rate_E1_total = 0.0;
  unit_pump.isc_E1_to_US = 0.0;
  unit_pump.us_total_rate = 0.0;
  unit_pump.ms_total_rate = 0.0;
  const rate::Matrix6d m_pump = rate::build_rate_matrix(unit_pump).m;

  const double pump0 = config.pump_rate;
  const double depth = opt.mod_depth;
  const ode::Deriv6 deriv = [&](double t, const rate::Vector6d& y) -> rate::Vector6d {
    const double pump = pump0 * (1.0 + depth * std::sin(kTwoPi * f * t));
    return m_base * y + pump * (m_pump * y);
  };

  const rate::Vector6d p0 = rate::steady_state(rate::build_rate_matrix(config));

  const double period = 1.0 / f;
  const int n_total = opt.n_periods * opt.samples_per_period;
  std::vector<double> times(n_total);
  for (int i = 0; i < n_total; ++i)
    times[i] = period * (i + 1) / opt.samples_per_period;

  const std::vector<rate::Vector6d> states = ode::integrate_at(deriv, 0.0, p0, times, opt.ode_ctrl);

  const int keep_from = n_total / 2;  // discard transient half
  ModulatedResponse out;
  out.frequency = f;
  out.times.reserve(n_total - keep_from);
  out.pump.reserve(n_total - keep_from);
  out.visible.reserve(n_total - keep_from);
  out.ir.reserve(n_total - keep_from);
  for (int i = keep_from; i < n_total; ++i) {
    const auto [vis, ir] = rate::emission_rates(states[i], config);
    out.times.push_back(times[i]);
    out.pump.push_back(pump0 * (1.0 + depth * std::sin(kTwoPi * f * times[i])));
    out.visible.push_back(vis);
    out.ir.push_back(ir);
  }
  return out;
}

PhasePoint extract_phase(const std::vector<double>& times, const std::vector<double>& reference,
                         const std::vector<double>& signal, double f) {
  if (f <= 0.0) throw validation_error("extract_phase: f must be > 0");
  if (times.size() != reference.size() || times.size() != signal.size())
    throw validation_error("extract_phase: series lengths differ");
  if (times.size() < 8) throw validation_error("extract_phase: too few samples");
  if ((times.back() - times.front()) * f < 3.0)
    throw validation_error("extract_phase: series must span >= 3 modulation periods");

  const QuadratureFit ref = fit_quadrature(times, reference, f);
  const QuadratureFit sig = fit_quadrature(times, signal, f);

  double phi = ref.psi - sig.psi;
  phi = std::fmod(phi, std::numbers::pi);
  if (phi < 0.0) phi += std::numbers::pi;

  PhasePoint out;
  out.f = f;
  out.phi = phi;
  out.sigma_phi = std::sqrt(ref.var_psi + sig.var_psi);
  return out;
}

std::vector<PhasePoint> phase_scan(const rate::RateConfig& config,
                                   const std::vector<double>& frequencies, Channel channel,
                                   const ModulationOptions& opt, Exec exec) {
  const int n = static_cast<int>(frequencies.size());
  std::vector<PhasePoint> out(n);
  auto body = [&](int i) {
    const ModulatedResponse r = simulate_modulated_response(config, frequencies[i], opt);
    const std::vector<double>& sig = channel == Channel::Visible ? r.visible : r.ir;
    out[i] = extract_phase(r.times, r.pump, sig, frequencies[i]);
  };
  if (exec == Exec::Parallel) {
    // Exceptions may not escape an OpenMP region; capture and rethrow.
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
#pragma omp critical(nvs_phase_scan_error)
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
  return out;
}

fit::FitResult fit_lifetimes(const std::vector<PhasePoint>& points, DecayKind kind,
                             const LifetimeFitOptions& opt) {
  const int n = static_cast<int>(points.size());
  const bool fixed = opt.fixed_tau1.has_value();
  if (kind == DecayKind::Single && fixed)
    throw validation_error("fit_lifetimes: fixed_tau1 only applies to the cascade model");
  int n_life = kind == DecayKind::Single ? 1 : (fixed ? 1 : 2);
  const int n_params = n_life + (opt.fit_delay ? 1 : 0);
  if (n < n_params + 1)
    throw validation_error("fit_lifetimes: need at least " + std::to_string(n_params + 1) +
                           " points for this model");
  for (const PhasePoint& p : points)
    if (p.f <= 0.0 || p.sigma_phi < 0.0)
      throw validation_error("fit_lifetimes: invalid phase point");

  // Rough lifetime scale from the largest-phase point.
  double tau_scale = 0.0;
  for (const PhasePoint& p : points)
    tau_scale = std::max(tau_scale, std::tan(std::min(p.phi, 1.5)) / (kTwoPi * p.f));
  if (tau_scale <= 0.0) tau_scale = 1e-9;

  Eigen::VectorXd p0(n_params);
  if (opt.initial_guess) {
    if (static_cast<int>(opt.initial_guess->size()) != n_params)
      throw validation_error("fit_lifetimes: initial_guess size mismatch");
    for (int i = 0; i < n_params; ++i) p0[i] = (*opt.initial_guess)[i];
  } else {
    if (kind == DecayKind::Single) {
      p0[0] = tau_scale;
    } else if (fixed) {
      p0[0] = std::max(tau_scale - *opt.fixed_tau1, 0.05 * *opt.fixed_tau1);
    } else {
      p0[0] = 0.8 * tau_scale;
      p0[1] = 0.2 * tau_scale;
    }
    if (opt.fit_delay) p0[n_params - 1] = 0.0;
  }

  const auto model = [kind, fixed, opt, n_life](double f, const Eigen::VectorXd& p) {
    double phi;
    if (kind == DecayKind::Single)
      phi = phase_single(f, p[0]);
    else if (fixed)
      phi = phase_cascade(f, *opt.fixed_tau1, p[0]);
    else
      phi = phase_cascade(f, p[0], p[1]);
    if (opt.fit_delay) phi += kTwoPi * f * p[n_life];
    return phi;
  };

  fit::FitProblem problem;
  problem.residual = [&points, &model](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(points.size());
    for (size_t i = 0; i < points.size(); ++i) r[i] = model(points[i].f, p) - points[i].phi;
    return r;
  };
  problem.initial_params = p0;

  bool any_sigma = false;
  for (const PhasePoint& p : points) any_sigma = any_sigma || p.sigma_phi > 0.0;
  if (any_sigma) {
    problem.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      const double s = points[i].sigma_phi > 0.0 ? points[i].sigma_phi : 1e-6;
      problem.weights[i] = 1.0 / (s * s);
    }
  }

  // Lifetimes must stay positive; the delay parameter is unconstrained.
  problem.lower_bounds = Eigen::VectorXd::Constant(n_params, 1e-15);
  problem.upper_bounds =
      Eigen::VectorXd::Constant(n_params, std::numeric_limits<double>::infinity());
  if (opt.fit_delay) {
    problem.lower_bounds[n_params - 1] = -std::numeric_limits<double>::infinity();
  }

  fit::FitResult result = fit::least_squares(problem);
  if (!result.converged)
    throw numeric_error("fit_lifetimes: did not converge (last chi2 = " +
                        std::to_string(result.chi2) + ")");
  return result;
}

}  // namespace nvs::phase
