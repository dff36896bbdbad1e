#include "nvsinglet/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nvsinglet/errors.hpp"

namespace nvs::ode {

namespace {

// Cash-Karp coefficients.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 3.0 / 10.0, a42 = -9.0 / 10.0, a43 = 6.0 / 5.0;
constexpr double a51 = -11.0 / 54.0, a52 = 5.0 / 2.0, a53 = -70.0 / 27.0, a54 = 35.0 / 27.0;
constexpr double a61 = 1631.0 / 55296.0, a62 = 175.0 / 512.0, a63 = 575.0 / 13824.0,
                 a64 = 44275.0 / 110592.0, a65 = 253.0 / 4096.0;
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 3.0 / 5.0, c5 = 1.0, c6 = 7.0 / 8.0;
constexpr double b1 = 37.0 / 378.0, b3 = 250.0 / 621.0, b4 = 125.0 / 594.0, b6 = 512.0 / 1771.0;
constexpr double d1 = 2825.0 / 27648.0, d3 = 18575.0 / 48384.0, d4 = 13525.0 / 55296.0,
                 d5 = 277.0 / 14336.0, d6 = 1.0 / 4.0;

struct StepResult {
  Vector6d y;
  double err;  // scaled error norm (<= 1 means accept)
};

StepResult try_step(const Deriv6& f, double t, const Vector6d& y, double h,
                    const StepControl& ctrl) {
  const Vector6d k1 = f(t, y);
  const Vector6d k2 = f(t + c2 * h, y + h * (a21 * k1));
  const Vector6d k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const Vector6d k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Vector6d k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Vector6d k6 = f(t + c6 * h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));

  const Vector6d y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
  const Vector6d y4 = y + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);

  double err = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double scale = ctrl.abs_tol + ctrl.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(y5[i] - y4[i]) / scale);
  }
  return {y5, err};
}

double initial_step_guess(const Deriv6& f, double t0, const Vector6d& y0, double span,
                          const StepControl& ctrl) {
  if (ctrl.initial_step > 0.0) return ctrl.initial_step;
  const Vector6d dy = f(t0, y0);
  const double dnorm = dy.cwiseAbs().maxCoeff();
  const double ynorm = std::max(y0.cwiseAbs().maxCoeff(), 1e-30);
  double h = dnorm > 0.0 ? 0.01 * ynorm / dnorm : span / 100.0;
  return std::min(h, span);
}

}  // namespace

std::vector<Vector6d> integrate_at(const Deriv6& f, double t0, const Vector6d& y0,
                                   const std::vector<double>& times, const StepControl& ctrl) {
  std::vector<Vector6d> out;
  out.reserve(times.size());
  if (times.empty()) return out;

  double prev = t0;
  for (double tq : times) {
    if (tq < prev)
      throw validation_error("integrate_at: sample times must be increasing and >= t0");
    prev = tq;
  }

  double t = t0;
  Vector6d y = y0;
  const double span = std::max(times.back() - t0, 0.0);
  double h = span > 0.0 ? initial_step_guess(f, t0, y0, span, ctrl) : 0.0;

  for (double tq : times) {
    while (t < tq) {
      double h_try = std::min(h, tq - t);
      if (ctrl.max_step > 0.0) h_try = std::min(h_try, ctrl.max_step);
      const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), std::abs(tq));
      if (h_try <= h_min) {
        std::ostringstream msg;
        msg << "ODE step size underflow at t = " << t << " s (h = " << h_try << ")";
        throw numeric_error(msg.str());
      }
      const StepResult step = try_step(f, t, y, h_try, ctrl);
      if (step.err <= 1.0) {
        t += h_try;
        y = step.y;
        const double grow = step.err > 0.0 ? 0.9 * std::pow(step.err, -0.2) : 5.0;
        h = h_try * std::clamp(grow, 0.2, 5.0);
      } else {
        h = h_try * std::clamp(0.9 * std::pow(step.err, -0.25), 0.1, 1.0);
      }
    }
    out.push_back(y);
  }
  return out;
}

Vector6d integrate_to(const Deriv6& f, double t0, const Vector6d& y0, double t1,
                      const StepControl& ctrl) {
  if (t1 <= t0) return y0;
  return integrate_at(f, t0, y0, {t1}, ctrl).front();
}

}  // namespace nvs::ode
