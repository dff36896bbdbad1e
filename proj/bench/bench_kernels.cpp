// Compares the serial reference kernels against the OpenMP-parallel ones:
// phase-shift frequency scan, thermal degeneracy grid search, ODMR spectrum.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "nvsinglet/odmr.hpp"
#include "nvsinglet/phase_shift.hpp"
#include "nvsinglet/rate_model.hpp"
#include "nvsinglet/thermal.hpp"

using namespace nvs;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

template <typename F>
double timed(const char* name, Exec exec, F&& body) {
  const auto t0 = clk::now();
  body();
  const double dt = seconds_since(t0);
  std::printf("%-28s %-9s %8.3f s\n", name, exec == Exec::Serial ? "serial" : "parallel", dt);
  return dt;
}

}  // namespace

int main() {
  const rate::RateConfig cfg = rate::default_nv_config();

  std::vector<double> freqs;
  for (int i = 0; i < 24; ++i) freqs.push_back(1.0e6 * std::pow(100.0, i / 23.0));

  std::printf("%-28s %-9s %10s\n", "kernel", "policy", "time");

  double s, p;
  s = timed("phase_scan (24 freqs)", Exec::Serial,
            [&] { phase::phase_scan(cfg, freqs, phase::Channel::Ir, {}, Exec::Serial); });
  p = timed("phase_scan (24 freqs)", Exec::Parallel,
            [&] { phase::phase_scan(cfg, freqs, phase::Channel::Ir, {}, Exec::Parallel); });
  std::printf("  speedup %.2fx\n", s / p);

  std::vector<thermal::LifetimePoint> points;
  thermal::ThermalModel truth{462e-9, {{43e-3, 3}, {137e-3, 0}}};
  for (int i = 0; i < 48; ++i) {
    const double t = 4.0 * std::pow(450.0 / 4.0, i / 47.0);
    points.push_back({t, thermal::lifetime_at(truth, t), 0.0});
  }
  s = timed("degeneracy search (cap 40)", Exec::Serial, [&] {
    thermal::fit_thermal_degeneracies(points, {43e-3, 137e-3}, 40, Exec::Serial);
  });
  p = timed("degeneracy search (cap 40)", Exec::Parallel, [&] {
    thermal::fit_thermal_degeneracies(points, {43e-3, 137e-3}, 40, Exec::Parallel);
  });
  std::printf("  speedup %.2fx\n", s / p);

  odmr::SpinSystemConfig spin;
  spin.b_field = Eigen::Vector3d(1.1e-3, 2.3e-3, 3.1e-3);
  std::vector<double> grid(200000);
  for (size_t i = 0; i < grid.size(); ++i)
    grid[i] = 2.5e9 + 0.7e9 * static_cast<double>(i) / (grid.size() - 1);
  s = timed("odmr spectrum (200k points)", Exec::Serial,
            [&] { odmr::spectrum(spin, grid, {}, Exec::Serial); });
  p = timed("odmr spectrum (200k points)", Exec::Parallel,
            [&] { odmr::spectrum(spin, grid, {}, Exec::Parallel); });
  std::printf("  speedup %.2fx\n", s / p);

  return 0;
}
