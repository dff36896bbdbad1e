#include "nvsinglet/rate_model.hpp"

#include <cmath>

#include "nvsinglet/errors.hpp"

namespace nvs::rate {

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw validation_error("RateConfig." + key + ": " + what);
}

}  // namespace

void RateConfig::validate() const {
  require(pump_rate >= 0.0, "pump_rate", "must be >= 0");
  require(rate_E0_total >= 0.0, "rate_E0_total", "must be >= 0");
  require(rate_E1_total >= 0.0, "rate_E1_total", "must be >= 0");
  require(isc_E0_to_US >= 0.0, "isc_E0_to_US", "must be >= 0");
  require(isc_E1_to_US >= 0.0, "isc_E1_to_US", "must be >= 0");
  require(us_total_rate >= 0.0, "us_total_rate", "must be >= 0");
  require(ms_total_rate >= 0.0, "ms_total_rate", "must be >= 0");
  require(g_spin_relax >= 0.0, "g_spin_relax", "must be >= 0");
  require(us_radiative_fraction >= 0.0 && us_radiative_fraction <= 1.0,
          "us_radiative_fraction", "must be in [0,1]");
  require(ms_branch_to_G0 >= 0.0 && ms_branch_to_G0 <= 1.0, "ms_branch_to_G0",
          "must be in [0,1]");
  require(isc_E0_to_US <= rate_E0_total, "isc_E0_to_US",
          "yields negative radiative rate (exceeds rate_E0_total)");
  require(isc_E1_to_US <= rate_E1_total, "isc_E1_to_US",
          "yields negative radiative rate (exceeds rate_E1_total)");
}

RateConfig default_nv_config() {
  RateConfig c;
  c.pump_rate = 1.0e6;
  c.g_spin_relax = 5.0e5;
  return c;
}

RateMatrix build_rate_matrix(const RateConfig& config) {
  config.validate();
  Matrix6d m = Matrix6d::Zero();

  auto add = [&m](int from, int to, double rate) {
    m(to, from) += rate;
    m(from, from) -= rate;
  };

  // Spin-conserving optical pumping.
  add(G0, E0, config.pump_rate);
  add(G1, E1, config.pump_rate);

  // 3E decay: radiative back to the same spin branch, ISC to the upper singlet.
  add(E0, G0, config.rate_E0_total - config.isc_E0_to_US);
  add(E0, US, config.isc_E0_to_US);
  add(E1, G1, config.rate_E1_total - config.isc_E1_to_US);
  add(E1, US, config.isc_E1_to_US);

  // Singlet cascade.
  add(US, MS, config.us_total_rate);
  add(MS, G0, config.ms_total_rate * config.ms_branch_to_G0);
  add(MS, G1, config.ms_total_rate * (1.0 - config.ms_branch_to_G0));

  // Ground-state T1 mixing, degeneracy weighted: the lumped G+-1 level holds
  // two sublevels, so equilibrium under pure mixing is 1/3 : 2/3.
  add(G0, G1, 2.0 * config.g_spin_relax);
  add(G1, G0, config.g_spin_relax);

  return {m};
}

PopulationTrace evolve(const std::function<RateMatrix(double)>& matrix_provider,
                       const Vector6d& p0, double t_end, int n_samples,
                       const ode::StepControl& ctrl) {
  if (t_end < 0.0) throw validation_error("evolve: t_end must be >= 0");
  if (n_samples < 0) throw validation_error("evolve: n_samples must be >= 0");
  const double psum = p0.sum();
  if (std::abs(psum - 1.0) > 1e-9 || (p0.array() < -1e-12).any())
    throw validation_error("evolve: p0 must be a probability vector (sum 1, entries >= 0)");

  PopulationTrace trace;
  if (t_end == 0.0 || n_samples == 0) return trace;

  const ode::Deriv6 deriv = [&matrix_provider](double t, const Vector6d& y) -> Vector6d {
    return matrix_provider(t).m * y;
  };

  std::vector<double> times(n_samples);
  for (int i = 0; i < n_samples; ++i) times[i] = t_end * (i + 1) / n_samples;

  trace.populations = ode::integrate_at(deriv, 0.0, p0, times, ctrl);
  trace.times = std::move(times);
  return trace;
}

PopulationTrace evolve(const RateConfig& config, const Vector6d& p0, double t_end,
                       int n_samples, const ode::StepControl& ctrl) {
  const RateMatrix m = build_rate_matrix(config);
  PopulationTrace trace = evolve([&m](double) { return m; }, p0, t_end, n_samples, ctrl);
  trace.visible_rate.reserve(trace.populations.size());
  trace.ir_rate.reserve(trace.populations.size());
  for (const Vector6d& p : trace.populations) {
    const auto [vis, ir] = emission_rates(p, config);
    trace.visible_rate.push_back(vis);
    trace.ir_rate.push_back(ir);
  }
  return trace;
}

Vector6d steady_state(const RateMatrix& matrix) {
  // Bordered system: first five rows of M plus the normalization row.
  Matrix6d a;
  a.topRows(5) = matrix.m.topRows(5);
  a.row(5).setOnes();
  Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
  b(5) = 1.0;

  const Eigen::FullPivLU<Matrix6d> lu(a);
  if (!lu.isInvertible())
    throw numeric_error("steady_state: stationary distribution is not unique "
                        "(singular rate matrix; zero pump and zero mixing?)");
  Vector6d p = lu.solve(b);

  const double scale = matrix.m.cwiseAbs().maxCoeff();
  if ((matrix.m * p).cwiseAbs().maxCoeff() > 1e-9 * std::max(scale, 1.0) ||
      (p.array() < -1e-9).any())
    throw numeric_error("steady_state: bordered solve did not yield a valid "
                        "stationary distribution");

  p = p.cwiseMax(0.0);
  p /= p.sum();
  return p;
}

std::pair<double, double> emission_rates(const Vector6d& populations, const RateConfig& config) {
  const double visible = (config.rate_E0_total - config.isc_E0_to_US) * populations[E0] +
                         (config.rate_E1_total - config.isc_E1_to_US) * populations[E1];
  const double ir = config.us_radiative_fraction * config.us_total_rate * populations[US];
  return {visible, ir};
}

}  // namespace nvs::rate
