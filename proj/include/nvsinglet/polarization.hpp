#ifndef NVSINGLET_POLARIZATION_HPP
#define NVSINGLET_POLARIZATION_HPP

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "nvsinglet/fit.hpp"

namespace nvs::polar {

enum class Irrep { A1, A2, E };
enum class Axis { X, Y, Z };

// C3v product-table decomposition: which dipole axes couple a pair of
// orbital irreps. x,y transform as E, z as A1. Computed from the product
// table, not hard-coded per pair; symmetric in its arguments.
std::set<Axis> allowed_axes(Irrep upper, Irrep lower);

struct PolarizationGeometry {
  Eigen::Vector3d nv_axis{0.0, 0.0, 1.0};      // z, unit
  Eigen::Vector3d propagation{1.0, 0.0, 0.0};  // k-hat, unit

  void validate() const;
  // Orthonormal pair spanning the polarizer plane (perpendicular to k-hat);
  // u is the deterministic theta = 0 reference.
  void polarizer_basis(Eigen::Vector3d& u, Eigen::Vector3d& v) const;
  // Polarization direction at polarizer angle theta.
  Eigen::Vector3d polarization(double theta) const;
  // Projection angle of the NV axis in the polarizer plane; defined when
  // nv_axis is not parallel to k-hat (returns 0 otherwise).
  double phi_nv() const;
};

// Sum over allowed axes of |eps-hat . a-hat|^2; the x,y doublet enters as an
// incoherent sum, so the result is independent of the transverse basis choice.
double absorption_strength(const std::set<Axis>& axes, const PolarizationGeometry& geometry,
                           double theta);

struct ContrastPoint {
  double theta = 0.0;
  double r = 0.0;
  double sigma = 0.0;
};

// R(theta) = (1 - c) * absorption_strength(theta) + c on the given grid.
std::vector<ContrastPoint> contrast_curve(const std::set<Axis>& axes,
                                          const PolarizationGeometry& geometry,
                                          const std::vector<double>& theta_grid, double floor_c);

struct PolarizationFit {
  fit::FitResult fit;   // params: [amplitude, phi_nv, c]
  double amplitude = 0.0;
  double phi_nv = 0.0;  // radians, reported modulo pi
  double offset = 0.0;
  double chi2_constant = 0.0;  // best constant-model chi2 for comparison
  bool sin2_preferred = false;
};

// Least-squares fit of A sin^2(theta - phi) + c.
// Needs >= 5 points spanning >= 180 degrees.
PolarizationFit fit_polarization(const std::vector<ContrastPoint>& points);

}  // namespace nvs::polar

#endif
