#include "nvsinglet/fit.hpp"

#include <cmath>
#include <limits>

#include "nvsinglet/errors.hpp"

namespace nvs::fit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bound handling: internal (unconstrained) coordinates u map to external
// parameters p. Unbounded: p = u. Lower only: p = lo + exp(u). Upper only:
// p = hi - exp(u). Two-sided: logistic between lo and hi.
struct BoundTransform {
  Eigen::VectorXd lo, hi;
  bool active = false;

  Eigen::VectorXd to_external(const Eigen::VectorXd& u) const {
    if (!active) return u;
    Eigen::VectorXd p(u.size());
    for (int i = 0; i < u.size(); ++i) {
      const bool has_lo = std::isfinite(lo[i]);
      const bool has_hi = std::isfinite(hi[i]);
      if (has_lo && has_hi)
        p[i] = lo[i] + (hi[i] - lo[i]) / (1.0 + std::exp(-u[i]));
      else if (has_lo)
        p[i] = lo[i] + std::exp(u[i]);
      else if (has_hi)
        p[i] = hi[i] - std::exp(u[i]);
      else
        p[i] = u[i];
    }
    return p;
  }

  Eigen::VectorXd to_internal(const Eigen::VectorXd& p) const {
    if (!active) return p;
    Eigen::VectorXd u(p.size());
    for (int i = 0; i < p.size(); ++i) {
      const bool has_lo = std::isfinite(lo[i]);
      const bool has_hi = std::isfinite(hi[i]);
      if (has_lo && has_hi) {
        const double t = (p[i] - lo[i]) / (hi[i] - lo[i]);
        u[i] = std::log(t / (1.0 - t));
      } else if (has_lo) {
        u[i] = std::log(p[i] - lo[i]);
      } else if (has_hi) {
        u[i] = std::log(hi[i] - p[i]);
      } else {
        u[i] = p[i];
      }
    }
    return u;
  }
};

}  // namespace

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& params,
                                 double rel_step, double step_floor) {
  const Eigen::VectorXd r0 = f(params);
  Eigen::MatrixXd jac(r0.size(), params.size());
  for (int j = 0; j < params.size(); ++j) {
    const double h = rel_step * std::max(std::abs(params[j]), step_floor);
    Eigen::VectorXd pp = params, pm = params;
    pp[j] += h;
    pm[j] -= h;
    const Eigen::VectorXd rp = f(pp);
    const Eigen::VectorXd rm = f(pm);
    if (!rp.allFinite() || !rm.allFinite())
      throw numeric_error("numeric_jacobian: non-finite residual when varying parameter " +
                          std::to_string(j));
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
  return jac;
}

FitResult least_squares(const FitProblem& problem) {
  const FitOptions& opt = problem.options;
  const int n_params = static_cast<int>(problem.initial_params.size());
  if (n_params == 0) throw validation_error("least_squares: empty parameter vector");

  BoundTransform bt;
  if (problem.lower_bounds.size() > 0 || problem.upper_bounds.size() > 0) {
    bt.active = true;
    bt.lo = problem.lower_bounds.size() > 0 ? problem.lower_bounds
                                            : Eigen::VectorXd::Constant(n_params, -kInf);
    bt.hi = problem.upper_bounds.size() > 0 ? problem.upper_bounds
                                            : Eigen::VectorXd::Constant(n_params, kInf);
    if (bt.lo.size() != n_params || bt.hi.size() != n_params)
      throw validation_error("least_squares: bound size mismatch");
  }

  // Work in internal coordinates; the residual is composed with the transform.
  const ResidualFn internal_residual = [&](const Eigen::VectorXd& u) {
    return problem.residual(bt.to_external(u));
  };

  Eigen::VectorXd u = bt.to_internal(problem.initial_params);
  Eigen::VectorXd r = internal_residual(u);
  const int n_points = static_cast<int>(r.size());
  if (n_points < n_params)
    throw validation_error("least_squares: fewer residuals (" + std::to_string(n_points) +
                           ") than parameters (" + std::to_string(n_params) + ")");
  if (!r.allFinite())
    throw validation_error("least_squares: residual non-finite at initial parameters");

  Eigen::VectorXd w = problem.weights;
  if (w.size() == 0) w = Eigen::VectorXd::Ones(n_points);
  if (w.size() != n_points) throw validation_error("least_squares: weight size mismatch");
  if ((w.array() <= 0.0).any()) throw validation_error("least_squares: weights must be > 0");

  auto cost_of = [&](const Eigen::VectorXd& res) { return (w.array() * res.array().square()).sum(); };

  double cost = cost_of(r);
  double lambda = opt.initial_lambda;
  bool converged = false;
  double grad_norm = 0.0;
  int iter = 0;

  for (; iter < opt.max_iterations; ++iter) {
    const Eigen::MatrixXd jac =
        numeric_jacobian(internal_residual, u, opt.jacobian_rel_step, opt.jacobian_step_floor);
    const Eigen::MatrixXd jw = w.asDiagonal() * jac;
    const Eigen::MatrixXd hessian = jac.transpose() * jw;          // J^T W J
    const Eigen::VectorXd gradient = jac.transpose() * (w.asDiagonal() * r);
    grad_norm = gradient.lpNorm<Eigen::Infinity>();

    if (grad_norm <= opt.gradient_tol * (1.0 + cost)) {
      converged = true;
      break;
    }

    // Marquardt scaling with a floor so zero-curvature directions stay regularized.
    Eigen::VectorXd diag = hessian.diagonal();
    const double dmax = diag.maxCoeff();
    for (int i = 0; i < n_params; ++i) diag[i] = std::max(diag[i], 1e-14 * std::max(dmax, 1.0));

    bool accepted = false;
    while (lambda < 1e15) {
      Eigen::MatrixXd damped = hessian;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      const Eigen::VectorXd u_try = u + step;
      const Eigen::VectorXd r_try = internal_residual(u_try);
      if (r_try.allFinite()) {
        const double cost_try = cost_of(r_try);
        if (cost_try <= cost) {
          const double decrease = cost - cost_try;
          const double step_size = step.lpNorm<Eigen::Infinity>();
          u = u_try;
          r = r_try;
          cost = cost_try;
          lambda = std::max(lambda / 10.0, 1e-14);
          accepted = true;
          if (step_size <= opt.step_tol * (1.0 + u.lpNorm<Eigen::Infinity>()) ||
              decrease <= opt.cost_tol * (cost + 1e-300)) {
            // Re-check the gradient at the new point for the converged flag.
            const Eigen::MatrixXd jac2 = numeric_jacobian(internal_residual, u,
                                                          opt.jacobian_rel_step,
                                                          opt.jacobian_step_floor);
            const Eigen::VectorXd g2 = jac2.transpose() * (w.asDiagonal() * r);
            grad_norm = g2.lpNorm<Eigen::Infinity>();
            converged = true;
          }
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted || converged) break;
  }

  FitResult out;
  out.params = bt.to_external(u);
  out.chi2 = cost;
  out.dof = std::max(n_points - n_params, 1);
  out.iterations = iter;
  out.converged = converged;
  out.gradient_norm = grad_norm;
  out.sigma = Eigen::VectorXd::Zero(n_params);
  out.covariance = Eigen::MatrixXd::Zero(n_params, n_params);

  if (converged) {
    // Covariance in external parameter space.
    const Eigen::MatrixXd jac_ext =
        numeric_jacobian(problem.residual, out.params, opt.jacobian_rel_step, opt.jacobian_step_floor);
    const Eigen::MatrixXd hess_ext = jac_ext.transpose() * (w.asDiagonal() * jac_ext);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(hess_ext, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues().maxCoeff();
    const double smin = svd.singularValues().minCoeff();
    if (smin > 0.0 && smax / smin < 1e12) {
      const double scale = out.chi2 / out.dof;
      out.covariance = hess_ext.inverse() * scale;
      out.sigma = out.covariance.diagonal().array().max(0.0).sqrt();
      out.sigma_available = true;
    }
  }
  return out;
}

}  // namespace nvs::fit
