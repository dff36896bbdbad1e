#ifndef NVSINGLET_THERMAL_HPP
#define NVSINGLET_THERMAL_HPP

#include <vector>

#include "nvsinglet/exec.hpp"
#include "nvsinglet/fit.hpp"

namespace nvs::thermal {

constexpr double kBoltzmannEvPerK = 8.617333e-5;

struct PhononMode {
  double epsilon = 0.0;  // eV, > 0
  int degeneracy = 1;    // >= 0
};

// tau[T] = tau0 / prod_i (1 + n_i[T])^degeneracy_i.
struct ThermalModel {
  double tau0 = 462.0e-9;                 // zero-temperature lifetime, s
  std::vector<PhononMode> modes = {{15.0e-3, 1}};

  void validate() const;
};

struct LifetimePoint {
  double temperature = 0.0;  // K
  double tau = 0.0;          // s
  double sigma_tau = 0.0;    // s, 0 = unknown
};

// Thermal mean phonon number (e^{eps/kT} - 1)^-1; 0 at T = 0 by continuity.
double bose_occupancy(double epsilon_ev, double temperature_k);

double lifetime_at(const ThermalModel& model, double temperature_k);

// Sum of degeneracy * epsilon over modes, in eV.
double total_gap(const ThermalModel& model);

struct ThermalFitResult {
  ThermalModel model;
  fit::FitResult fit;  // params: [tau0, eps_1..eps_N] (fixed-energy search: [tau0])
};

// Continuous fit of tau0 and n_modes free mode energies (each degeneracy 1).
// Parameterized internally in log-space to enforce positivity.
ThermalFitResult fit_thermal_free(const std::vector<LifetimePoint>& points, int n_modes);

struct DegeneracySearchResult {
  ThermalModel model;       // best tuple with fitted tau0
  fit::FitResult fit;
  std::vector<int> degeneracies;
  double chi2 = 0.0;
};

// Exhaustive search over integer degeneracy tuples (0..max_degeneracy per
// mode) for fixed mode energies, fitting only tau0 for each tuple and
// returning the minimum-chi2 tuple. Deterministic under both policies.
DegeneracySearchResult fit_thermal_degeneracies(const std::vector<LifetimePoint>& points,
                                                const std::vector<double>& energies_ev,
                                                int max_degeneracy = 6,
                                                Exec exec = Exec::Parallel);

}  // namespace nvs::thermal

#endif
