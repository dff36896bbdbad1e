#include "nvsinglet/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nvsinglet/errors.hpp"

namespace nvs::polar {

namespace {

// C3v irrep products as multisets of irreps. A1 is the trivial irrep;
// E x E = A1 + A2 + E.
std::set<Irrep> product(Irrep a, Irrep b) {
  if (a == Irrep::A1) return {b};
  if (b == Irrep::A1) return {a};
  if (a == Irrep::A2 && b == Irrep::A2) return {Irrep::A1};
  if (a == Irrep::E && b == Irrep::E) return {Irrep::A1, Irrep::A2, Irrep::E};
  return {Irrep::E};  // A2 x E
}

Irrep axis_irrep(Axis a) { return a == Axis::Z ? Irrep::A1 : Irrep::E; }

}  // namespace

std::set<Axis> allowed_axes(Irrep upper, Irrep lower) {
  const std::set<Irrep> decomposition = product(upper, lower);
  std::set<Axis> axes;
  for (Axis a : {Axis::X, Axis::Y, Axis::Z})
    if (decomposition.count(axis_irrep(a))) axes.insert(a);
  return axes;
}

void PolarizationGeometry::validate() const {
  if (std::abs(nv_axis.norm() - 1.0) > 1e-9)
    throw validation_error("PolarizationGeometry.nv_axis: must be a unit vector");
  if (std::abs(propagation.norm() - 1.0) > 1e-9)
    throw validation_error("PolarizationGeometry.propagation: must be a unit vector");
}

void PolarizationGeometry::polarizer_basis(Eigen::Vector3d& u, Eigen::Vector3d& v) const {
  const Eigen::Vector3d ref = std::abs(propagation.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                              : Eigen::Vector3d::UnitY();
  u = (ref - ref.dot(propagation) * propagation).normalized();
  v = propagation.cross(u);
}

Eigen::Vector3d PolarizationGeometry::polarization(double theta) const {
  Eigen::Vector3d u, v;
  polarizer_basis(u, v);
  return std::cos(theta) * u + std::sin(theta) * v;
}

double PolarizationGeometry::phi_nv() const {
  Eigen::Vector3d u, v;
  polarizer_basis(u, v);
  const double zu = nv_axis.dot(u), zv = nv_axis.dot(v);
  if (zu * zu + zv * zv < 1e-18) return 0.0;  // z parallel to k-hat
  return std::atan2(zv, zu);
}

double absorption_strength(const std::set<Axis>& axes, const PolarizationGeometry& geometry,
                           double theta) {
  geometry.validate();
  const Eigen::Vector3d eps = geometry.polarization(theta);
  const double along_z2 = std::pow(eps.dot(geometry.nv_axis), 2);
  double strength = 0.0;
  if (axes.count(Axis::Z)) strength += along_z2;
  // |eps.x|^2 + |eps.y|^2 = 1 - |eps.z|^2 for any transverse basis.
  if (axes.count(Axis::X) || axes.count(Axis::Y)) strength += 1.0 - along_z2;
  return std::clamp(strength, 0.0, 1.0);
}

std::vector<ContrastPoint> contrast_curve(const std::set<Axis>& axes,
                                          const PolarizationGeometry& geometry,
                                          const std::vector<double>& theta_grid, double floor_c) {
  if (floor_c < 0.0 || floor_c >= 1.0 + 1e-12)
    throw validation_error("contrast_curve: floor must be in [0,1]");
  std::vector<ContrastPoint> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    ContrastPoint p;
    p.theta = theta;
    p.r = (1.0 - floor_c) * absorption_strength(axes, geometry, theta) + floor_c;
    out.push_back(p);
  }
  return out;
}

PolarizationFit fit_polarization(const std::vector<ContrastPoint>& points) {
  if (points.size() < 5) throw validation_error("fit_polarization: need >= 5 points");
  double t_min = points.front().theta, t_max = t_min;
  for (const ContrastPoint& p : points) {
    t_min = std::min(t_min, p.theta);
    t_max = std::max(t_max, p.theta);
  }
  if (t_max - t_min < std::numbers::pi - 1e-9)
    throw validation_error("fit_polarization: points must span >= 180 degrees");

  const int n = static_cast<int>(points.size());
  Eigen::VectorXd weights;
  bool any_sigma = false;
  for (const ContrastPoint& p : points) any_sigma = any_sigma || p.sigma > 0.0;
  if (any_sigma) {
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      const double s = points[i].sigma > 0.0 ? points[i].sigma : 1e-3;
      weights[i] = 1.0 / (s * s);
    }
  }

  // Initial guess from the data range; phi from the smallest point.
  double r_min = points[0].r, r_max = points[0].r, theta_at_min = points[0].theta;
  for (const ContrastPoint& p : points) {
    if (p.r < r_min) {
      r_min = p.r;
      theta_at_min = p.theta;
    }
    r_max = std::max(r_max, p.r);
  }

  fit::FitProblem problem;
  problem.residual = [&points](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
      const double s = std::sin(points[i].theta - p[1]);
      r[i] = p[0] * s * s + p[2] - points[i].r;
    }
    return r;
  };
  problem.initial_params = Eigen::Vector3d(std::max(r_max - r_min, 1e-6), theta_at_min, r_min);
  problem.weights = weights;

  fit::FitResult result = fit::least_squares(problem);
  if (!result.converged) throw numeric_error("fit_polarization: did not converge");

  PolarizationFit out;
  out.fit = result;
  out.amplitude = result.params[0];
  out.offset = result.params[2];
  // Normalize: keep amplitude >= 0 (A sin^2 = -A sin^2(.+pi/2) + A + c),
  // and report phi modulo pi.
  if (out.amplitude < 0.0) {
    out.amplitude = -out.amplitude;
    out.offset = result.params[2] - out.amplitude;
    out.fit.params[0] = out.amplitude;
    out.fit.params[2] = out.offset;
    out.fit.params[1] += std::numbers::pi / 2.0;
  }
  double phi = std::fmod(out.fit.params[1], std::numbers::pi);
  if (phi < 0.0) phi += std::numbers::pi;
  out.phi_nv = phi;
  out.fit.params[1] = phi;

  // Constant-model comparison: weighted mean.
  double wsum = 0.0, mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = any_sigma ? weights[i] : 1.0;
    wsum += w;
    mean += w * points[i].r;
  }
  mean /= wsum;
  double chi2c = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = any_sigma ? weights[i] : 1.0;
    chi2c += w * std::pow(points[i].r - mean, 2);
  }
  out.chi2_constant = chi2c;
  // Penalize the two extra parameters when comparing (AIC-style 2 per param).
  // Without measurement sigmas the chi2 values are in arbitrary units, so
  // normalize both by the sin^2-model residual variance first.
  double unit = 1.0;
  if (!any_sigma) unit = std::max(result.chi2 / result.dof, 1e-300);
  out.sin2_preferred = result.chi2 / unit + 4.0 < chi2c / unit;
  return out;
}

}  // namespace nvs::polar
