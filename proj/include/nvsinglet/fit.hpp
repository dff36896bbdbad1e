#ifndef NVSINGLET_FIT_HPP
#define NVSINGLET_FIT_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

namespace nvs::fit {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct FitOptions {
  double gradient_tol = 1e-10;   // relative to 1 + chi2
  double step_tol = 1e-13;
  double cost_tol = 1e-14;       // relative chi2 decrease
  int max_iterations = 300;
  double initial_lambda = 1e-8;
  double jacobian_rel_step = 1e-6;
  double jacobian_step_floor = 1e-8;
};

struct FitProblem {
  ResidualFn residual;
  Eigen::VectorXd initial_params;
  Eigen::VectorXd weights;        // per-point, > 0; empty = unweighted
  Eigen::VectorXd lower_bounds;   // empty or per-param (-inf allowed)
  Eigen::VectorXd upper_bounds;
  FitOptions options;
};

struct FitResult {
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;          // 1-sigma from covariance; zero if unavailable
  Eigen::MatrixXd covariance;     // (J^T W J)^-1 * chi2/dof
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  bool sigma_available = false;
  double gradient_norm = 0.0;
};

// Central-difference Jacobian; step = rel_step * max(|p_i|, step_floor).
// Throws numeric_error naming the parameter if an evaluation is non-finite.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& params,
                                 double rel_step = 1e-6, double step_floor = 1e-8);

// Levenberg-Marquardt minimization of sum_i w_i r_i(p)^2.
// Damping: lambda *= 10 on rejected steps, /= 10 on accepted.
// Box bounds are enforced by an internal parameter transform.
FitResult least_squares(const FitProblem& problem);

}  // namespace nvs::fit

#endif
