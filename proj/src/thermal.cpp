#include "nvsinglet/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvsinglet/errors.hpp"

namespace nvs::thermal {

namespace {

void check_points(const std::vector<LifetimePoint>& points, int n_params) {
  if (static_cast<int>(points.size()) < n_params + 1)
    throw validation_error("fit_thermal: under-determined (need >= " +
                           std::to_string(n_params + 1) + " points)");
  double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
  for (const LifetimePoint& p : points) {
    if (p.temperature < 0.0 || p.tau <= 0.0 || p.sigma_tau < 0.0)
      throw validation_error("fit_thermal: invalid lifetime point");
    if (p.temperature > 0.0) {
      t_min = std::min(t_min, p.temperature);
      t_max = std::max(t_max, p.temperature);
    }
  }
  if (!(t_max >= 3.0 * t_min))
    throw validation_error("fit_thermal: temperatures must span a factor >= 3");
}

Eigen::VectorXd make_weights(const std::vector<LifetimePoint>& points) {
  bool any = false;
  for (const LifetimePoint& p : points) any = any || p.sigma_tau > 0.0;
  if (!any) return {};
  Eigen::VectorXd w(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const double s = points[i].sigma_tau > 0.0 ? points[i].sigma_tau : points[i].tau * 1e-3;
    w[i] = 1.0 / (s * s);
  }
  return w;
}

// Closed-form weighted fit of tau0 for fixed mode structure: tau_model(T) =
// tau0 * g(T) is linear in tau0.
std::pair<double, double> fit_tau0_fixed_structure(const std::vector<LifetimePoint>& points,
                                                   const ThermalModel& structure) {
  double num = 0.0, den = 0.0;
  for (const LifetimePoint& p : points) {
    ThermalModel unit = structure;
    unit.tau0 = 1.0;
    const double g = lifetime_at(unit, p.temperature);
    const double s = p.sigma_tau > 0.0 ? p.sigma_tau : 1.0;
    const double w = 1.0 / (s * s);
    num += w * g * p.tau;
    den += w * g * g;
  }
  const double tau0 = num / den;
  double chi2 = 0.0;
  for (const LifetimePoint& p : points) {
    ThermalModel m = structure;
    m.tau0 = tau0;
    const double s = p.sigma_tau > 0.0 ? p.sigma_tau : 1.0;
    const double r = (lifetime_at(m, p.temperature) - p.tau) / s;
    chi2 += r * r;
  }
  return {tau0, chi2};
}

}  // namespace

void ThermalModel::validate() const {
  if (tau0 <= 0.0) throw validation_error("ThermalModel.tau0: must be > 0");
  for (const PhononMode& m : modes) {
    if (m.epsilon <= 0.0) throw validation_error("ThermalModel.modes: epsilon must be > 0");
    if (m.degeneracy < 0) throw validation_error("ThermalModel.modes: degeneracy must be >= 0");
  }
}

double bose_occupancy(double epsilon_ev, double temperature_k) {
  if (epsilon_ev <= 0.0) throw validation_error("bose_occupancy: epsilon must be > 0");
  if (temperature_k < 0.0) throw validation_error("bose_occupancy: T must be >= 0");
  if (temperature_k == 0.0) return 0.0;
  const double x = epsilon_ev / (kBoltzmannEvPerK * temperature_k);
  if (x > 700.0) return 0.0;  // below double underflow, limit value
  return 1.0 / std::expm1(x);
}

double lifetime_at(const ThermalModel& model, double temperature_k) {
  model.validate();
  double rate_factor = 1.0;
  for (const PhononMode& m : model.modes)
    rate_factor *= std::pow(1.0 + bose_occupancy(m.epsilon, temperature_k), m.degeneracy);
  return model.tau0 / rate_factor;
}

double total_gap(const ThermalModel& model) {
  model.validate();
  double gap = 0.0;
  for (const PhononMode& m : model.modes) gap += m.degeneracy * m.epsilon;
  return gap;
}

ThermalFitResult fit_thermal_free(const std::vector<LifetimePoint>& points, int n_modes) {
  if (n_modes < 0) throw validation_error("fit_thermal_free: n_modes must be >= 0");
  check_points(points, n_modes + 1);

  // Initial guesses: tau0 from the coldest point, energies near k_B T_max.
  double tau0_init = points.front().tau;
  double t_cold = std::numeric_limits<double>::infinity(), t_max = 0.0;
  for (const LifetimePoint& p : points) {
    if (p.temperature < t_cold) {
      t_cold = p.temperature;
      tau0_init = p.tau;
    }
    t_max = std::max(t_max, p.temperature);
  }

  // Log-space parameters: [log tau0, log eps_1..].
  Eigen::VectorXd p0(n_modes + 1);
  p0[0] = std::log(tau0_init);
  for (int i = 0; i < n_modes; ++i)
    p0[i + 1] = std::log(kBoltzmannEvPerK * t_max * (0.6 + 0.2 * i));

  // Residuals in sigma units (relative units when no sigmas are given) so
  // the optimizer works on O(1) quantities rather than seconds.
  bool any_sigma = false;
  for (const LifetimePoint& p : points) any_sigma = any_sigma || p.sigma_tau > 0.0;
  std::vector<double> scales(points.size());
  for (size_t i = 0; i < points.size(); ++i)
    scales[i] = any_sigma
                    ? (points[i].sigma_tau > 0.0 ? points[i].sigma_tau : points[i].tau * 1e-3)
                    : points[i].tau;

  fit::FitProblem problem;
  problem.residual = [&points, &scales, n_modes](const Eigen::VectorXd& p) {
    ThermalModel m;
    m.tau0 = std::exp(p[0]);
    m.modes.clear();
    for (int i = 0; i < n_modes; ++i) m.modes.push_back({std::exp(p[i + 1]), 1});
    Eigen::VectorXd r(points.size());
    for (size_t i = 0; i < points.size(); ++i)
      r[i] = (lifetime_at(m, points[i].temperature) - points[i].tau) / scales[i];
    return r;
  };
  problem.initial_params = p0;

  fit::FitResult log_fit = fit::least_squares(problem);
  if (!log_fit.converged)
    throw numeric_error("fit_thermal_free: did not converge (chi2 = " +
                        std::to_string(log_fit.chi2) + ")");

  // Report in linear units: params exp'd, covariance by the chain rule.
  ThermalFitResult out;
  out.fit = log_fit;
  out.fit.params = log_fit.params.array().exp();
  if (log_fit.sigma_available) {
    const Eigen::MatrixXd scale = out.fit.params.asDiagonal();
    out.fit.covariance = scale * log_fit.covariance * scale;
    out.fit.sigma = out.fit.covariance.diagonal().array().max(0.0).sqrt();
  }
  out.model.tau0 = out.fit.params[0];
  out.model.modes.clear();
  for (int i = 0; i < n_modes; ++i) out.model.modes.push_back({out.fit.params[i + 1], 1});
  return out;
}

DegeneracySearchResult fit_thermal_degeneracies(const std::vector<LifetimePoint>& points,
                                                const std::vector<double>& energies_ev,
                                                int max_degeneracy, Exec exec) {
  if (energies_ev.empty()) throw validation_error("fit_thermal_degeneracies: no mode energies");
  for (double e : energies_ev)
    if (e <= 0.0) throw validation_error("fit_thermal_degeneracies: energies must be > 0");
  if (max_degeneracy < 0)
    throw validation_error("fit_thermal_degeneracies: max_degeneracy must be >= 0");
  check_points(points, 1);

  const int n_modes = static_cast<int>(energies_ev.size());
  const int base = max_degeneracy + 1;
  long n_tuples = 1;
  for (int i = 0; i < n_modes; ++i) n_tuples *= base;

  std::vector<double> chi2s(n_tuples);
  std::vector<double> tau0s(n_tuples);

  auto decode = [&](long idx) {
    std::vector<int> degs(n_modes);
    for (int i = 0; i < n_modes; ++i) {
      degs[i] = static_cast<int>(idx % base);
      idx /= base;
    }
    return degs;
  };

  auto body = [&](long idx) {
    const std::vector<int> degs = decode(idx);
    ThermalModel m;
    m.tau0 = 1.0;
    m.modes.clear();
    for (int i = 0; i < n_modes; ++i) m.modes.push_back({energies_ev[i], degs[i]});
    const auto [tau0, chi2] = fit_tau0_fixed_structure(points, m);
    tau0s[idx] = tau0;
    chi2s[idx] = chi2;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long idx = 0; idx < n_tuples; ++idx) body(idx);
  } else {
    for (long idx = 0; idx < n_tuples; ++idx) body(idx);
  }

  // Deterministic tie-break: lowest index wins.
  long best = 0;
  for (long idx = 1; idx < n_tuples; ++idx)
    if (chi2s[idx] < chi2s[best]) best = idx;

  DegeneracySearchResult out;
  out.degeneracies = decode(best);
  out.chi2 = chi2s[best];
  out.model.tau0 = tau0s[best];
  out.model.modes.clear();
  for (int i = 0; i < n_modes; ++i) out.model.modes.push_back({energies_ev[i], out.degeneracies[i]});

  // Package the tau0 fit through the shared engine for uncertainty reporting.
  fit::FitProblem problem;
  ThermalModel structure = out.model;
  problem.residual = [&points, structure](const Eigen::VectorXd& p) {
    ThermalModel m = structure;
    m.tau0 = p[0];
    Eigen::VectorXd r(points.size());
    for (size_t i = 0; i < points.size(); ++i)
      r[i] = lifetime_at(m, points[i].temperature) - points[i].tau;
    return r;
  };
  problem.initial_params = Eigen::VectorXd::Constant(1, out.model.tau0);
  problem.weights = make_weights(points);
  out.fit = fit::least_squares(problem);
  out.model.tau0 = out.fit.params[0];
  return out;
}

}  // namespace nvs::thermal
