#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nvsinglet/errors.hpp"
#include "nvsinglet/thermal.hpp"

using namespace nvs;

namespace {

std::vector<thermal::LifetimePoint> synth(const thermal::ThermalModel& model,
                                          double t_lo, double t_hi, int n) {
  std::vector<thermal::LifetimePoint> out;
  for (int i = 0; i < n; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n - 1));
    out.push_back({t, thermal::lifetime_at(model, t), 0.0});
  }
  return out;
}

}  // namespace

TEST_CASE("bose occupancy limits and exact point") {
  CHECK(thermal::bose_occupancy(15e-3, 0.0) == 0.0);
  // epsilon = kB T ln2 gives exactly 1.
  const double t = 100.0;
  CHECK(thermal::bose_occupancy(thermal::kBoltzmannEvPerK * t * std::log(2.0), t) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Frozen from direct evaluation with long-double arithmetic:
  // 1/(exp(0.015/(kB*295)) - 1).
  CHECK(thermal::bose_occupancy(15e-3, 295.0) == doctest::Approx(1.2436309).epsilon(1e-6));
}

TEST_CASE("lifetime_at reproduces the quoted temperature points") {
  thermal::ThermalModel m;
  m.tau0 = 462e-9;
  m.modes = {{15e-3, 1}};
  CHECK(thermal::lifetime_at(m, 0.0) == m.tau0);
  const double tau295 = thermal::lifetime_at(m, 295.0);
  const double tau450 = thermal::lifetime_at(m, 450.0);
  CHECK(tau295 == doctest::Approx(205.9e-9).epsilon(1e-3));
  CHECK(tau450 == doctest::Approx(148.2e-9).epsilon(1e-3));
  // Within 10% of the measured values.
  CHECK(std::abs(tau295 - 219e-9) / 219e-9 < 0.10);
  CHECK(std::abs(tau450 - 142e-9) / 142e-9 < 0.10);
}

TEST_CASE("total_gap sums degeneracy-weighted energies") {
  CHECK(thermal::total_gap({462e-9, {{15e-3, 1}}}) == doctest::Approx(15e-3));
  CHECK(thermal::total_gap({462e-9, {{43e-3, 3}, {137e-3, 0}}}) == doctest::Approx(129e-3));
  CHECK(thermal::total_gap({462e-9, {}}) == 0.0);
}

TEST_CASE("lifetime_at is non-increasing in T, constant only with no modes") {
  thermal::ThermalModel m{300e-9, {{20e-3, 2}}};
  double prev = thermal::lifetime_at(m, 0.0);
  for (double t = 10.0; t < 600.0; t += 25.0) {
    const double now = thermal::lifetime_at(m, t);
    CHECK(now < prev);
    prev = now;
  }
  thermal::ThermalModel flat{300e-9, {}};
  CHECK(thermal::lifetime_at(flat, 0.0) == thermal::lifetime_at(flat, 500.0));
}

TEST_CASE("low-T limit reaches tau0 to 1e-12 relative") {
  thermal::ThermalModel m{462e-9, {{15e-3, 1}}};
  const double t = 15e-3 / (40.0 * thermal::kBoltzmannEvPerK);  // eps/(40 kB)
  CHECK(std::abs(thermal::lifetime_at(m, t) - m.tau0) / m.tau0 < 1e-12);
}

TEST_CASE("high-T rate approaches the linear asymptote within 1%") {
  const double eps = 10e-3;
  thermal::ThermalModel m{100e-9, {{eps, 1}}};
  const double t = 21.0 * eps / thermal::kBoltzmannEvPerK;  // kB T > 20 eps
  const double rate = 1.0 / thermal::lifetime_at(m, t);
  const double asym = (1.0 / m.tau0) * (thermal::kBoltzmannEvPerK * t / eps + 0.5);
  CHECK(rate == doctest::Approx(asym).epsilon(0.01));
}

TEST_CASE("permuting the mode list leaves lifetime_at unchanged to rounding") {
  thermal::ThermalModel a{250e-9, {{43e-3, 3}, {137e-3, 1}, {15e-3, 2}}};
  thermal::ThermalModel b{250e-9, {{15e-3, 2}, {43e-3, 3}, {137e-3, 1}}};
  for (double t : {4.4, 77.0, 295.0, 450.0})
    CHECK(thermal::lifetime_at(a, t) ==
          doctest::Approx(thermal::lifetime_at(b, t)).epsilon(1e-14));
}

TEST_CASE("free fit recovers a single-mode model from noise-free data") {
  thermal::ThermalModel truth{462e-9, {{15e-3, 1}}};
  const auto points = synth(truth, 4.0, 450.0, 12);
  const thermal::ThermalFitResult r = thermal::fit_thermal_free(points, 1);
  CHECK(r.model.tau0 == doctest::Approx(462e-9).epsilon(1e-4));
  CHECK(r.model.modes[0].epsilon == doctest::Approx(15e-3).epsilon(1e-4));
}

TEST_CASE("two nearly-degenerate modes: total gap recovered within 1%") {
  thermal::ThermalModel truth{462e-9, {{60e-3, 1}, {58e-3, 1}}};
  const auto points = synth(truth, 4.0, 600.0, 25);
  const thermal::ThermalFitResult r = thermal::fit_thermal_free(points, 2);
  const double gap = thermal::total_gap(r.model);
  CHECK(gap == doctest::Approx(118e-3).epsilon(0.01));
  CHECK(r.model.tau0 == doctest::Approx(462e-9).epsilon(0.01));
}

TEST_CASE("fixed-energy degeneracy search selects the generating tuple") {
  thermal::ThermalModel truth{462e-9, {{43e-3, 3}, {137e-3, 0}}};
  const auto points = synth(truth, 4.0, 450.0, 16);
  const thermal::DegeneracySearchResult r =
      thermal::fit_thermal_degeneracies(points, {43e-3, 137e-3}, 6);
  REQUIRE(r.degeneracies.size() == 2);
  CHECK(r.degeneracies[0] == 3);
  CHECK(r.degeneracies[1] == 0);
  CHECK(r.model.tau0 == doctest::Approx(462e-9).epsilon(1e-6));
}

TEST_CASE("degeneracy search: serial and parallel are identical") {
  thermal::ThermalModel truth{300e-9, {{43e-3, 2}, {137e-3, 1}}};
  auto points = synth(truth, 10.0, 500.0, 14);
  const auto serial = thermal::fit_thermal_degeneracies(points, {43e-3, 137e-3}, 6, Exec::Serial);
  const auto parallel =
      thermal::fit_thermal_degeneracies(points, {43e-3, 137e-3}, 6, Exec::Parallel);
  CHECK(serial.degeneracies == parallel.degeneracies);
  CHECK(serial.chi2 == parallel.chi2);
  CHECK(serial.model.tau0 == parallel.model.tau0);
}

TEST_CASE("fit on the three published lifetimes recovers eps = 15 +- 3 meV") {
  const std::vector<thermal::LifetimePoint> points = {
      {4.4, 462e-9, 10e-9}, {295.0, 219e-9, 3e-9}, {450.0, 142e-9, 6e-9}};
  const thermal::ThermalFitResult r = thermal::fit_thermal_free(points, 1);
  CHECK(std::abs(r.model.modes[0].epsilon - 15e-3) < 3e-3);
}

TEST_CASE("degenerate and under-determined inputs are rejected") {
  std::vector<thermal::LifetimePoint> same_t = {
      {100.0, 1e-7, 0.0}, {100.0, 1.1e-7, 0.0}, {100.0, 0.9e-7, 0.0}};
  CHECK_THROWS_AS(thermal::fit_thermal_free(same_t, 1), validation_error);
  std::vector<thermal::LifetimePoint> one = {{100.0, 1e-7, 0.0}};
  CHECK_THROWS_AS(thermal::fit_thermal_free(one, 1), validation_error);
  CHECK_THROWS_AS(thermal::bose_occupancy(-1.0, 300.0), validation_error);
}
