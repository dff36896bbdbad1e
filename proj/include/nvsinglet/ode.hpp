#ifndef NVSINGLET_ODE_HPP
#define NVSINGLET_ODE_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace nvs::ode {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Deriv6 = std::function<Vector6d(double t, const Vector6d& y)>;

struct StepControl {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 = auto
  double max_step = 0.0;      // 0 = unlimited
};

// Integrates y' = f(t, y) with an adaptive embedded Cash-Karp 5(4)
// Runge-Kutta pair, returning the state at each requested time.
// Times must be strictly increasing and >= t0.
// Throws numeric_error naming the time of failure on step-size underflow.
std::vector<Vector6d> integrate_at(const Deriv6& f, double t0, const Vector6d& y0,
                                   const std::vector<double>& times,
                                   const StepControl& ctrl = {});

// Convenience endpoint-only variant.
Vector6d integrate_to(const Deriv6& f, double t0, const Vector6d& y0, double t1,
                      const StepControl& ctrl = {});

}  // namespace nvs::ode

#endif
