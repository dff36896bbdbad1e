#include "nvsinglet/odmr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "nvsinglet/errors.hpp"

namespace nvs::odmr {

namespace {

using std::complex;
const complex<double> kI{0.0, 1.0};

// Spin-1 operators in the |+1>, |0>, |-1> basis.
Eigen::Matrix3cd spin_x() {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  const double s = 1.0 / std::sqrt(2.0);
  m(0, 1) = s; m(1, 0) = s; m(1, 2) = s; m(2, 1) = s;
  return m;
}

Eigen::Matrix3cd spin_y() {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  const double s = 1.0 / std::sqrt(2.0);
  m(0, 1) = -kI * s; m(1, 0) = kI * s; m(1, 2) = -kI * s; m(2, 1) = kI * s;
  return m;
}

Eigen::Matrix3cd spin_z() {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = 1.0; m(2, 2) = -1.0;
  return m;
}

// Deterministic orthonormal completion of the NV z axis.
void nv_frame(const Eigen::Vector3d& z, Eigen::Vector3d& x, Eigen::Vector3d& y) {
  const Eigen::Vector3d ref =
      std::abs(z.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  x = (ref - ref.dot(z) * z).normalized();
  y = z.cross(x);
}

double lorentzian_unit_peak(double f, double center, double fwhm) {
  const double hw = 0.5 * fwhm;
  const double d = f - center;
  return hw * hw / (d * d + hw * hw);
}

}  // namespace

SpinSystemConfig::SpinSystemConfig() : orientations(nv_orientations()) {}

const std::array<Eigen::Vector3d, 4>& nv_orientations() {
  static const std::array<Eigen::Vector3d, 4> dirs = [] {
    const double s = 1.0 / std::sqrt(3.0);
    return std::array<Eigen::Vector3d, 4>{
        Eigen::Vector3d(s, s, s), Eigen::Vector3d(s, -s, -s),
        Eigen::Vector3d(-s, s, -s), Eigen::Vector3d(-s, -s, s)};
  }();
  return dirs;
}

void SpinSystemConfig::validate() const {
  if (d_splitting <= 0.0) throw validation_error("SpinSystemConfig.D: must be > 0");
  if (std::abs(e_splitting) >= d_splitting)
    throw validation_error("SpinSystemConfig.E: |E| must be < D");
  if (linewidth <= 0.0) throw validation_error("SpinSystemConfig.linewidth: must be > 0");
  for (const auto& v : orientations)
    if (std::abs(v.norm() - 1.0) > 1e-9)
      throw validation_error("SpinSystemConfig.orientations: must be unit vectors");
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(std::abs(orientations[i].dot(orientations[j])) - 1.0 / 3.0) > 1e-6)
        throw validation_error(
            "SpinSystemConfig.orientations: pairwise angles must be arccos(+-1/3)");
}

Eigen::Matrix3cd spin_hamiltonian(const SpinSystemConfig& config,
                                  const Eigen::Vector3d& orientation) {
  Eigen::Vector3d x_nv, y_nv;
  const Eigen::Vector3d z_nv = orientation;
  nv_frame(z_nv, x_nv, y_nv);
  const Eigen::Vector3d b_nv(config.b_field.dot(x_nv), config.b_field.dot(y_nv),
                             config.b_field.dot(z_nv));

  const Eigen::Matrix3cd sx = spin_x(), sy = spin_y(), sz = spin_z();
  Eigen::Matrix3cd h =
      config.d_splitting * (sz * sz - (2.0 / 3.0) * Eigen::Matrix3cd::Identity()) +
      config.e_splitting * (sx * sx - sy * sy) +
      config.gamma * (b_nv.x() * sx + b_nv.y() * sy + b_nv.z() * sz);
  return h;
}

std::vector<ResonanceLine> resonance_frequencies(const SpinSystemConfig& config) {
  config.validate();
  std::vector<ResonanceLine> lines;
  lines.reserve(8);
  for (int o = 0; o < 4; ++o) {
    const Eigen::Matrix3cd h = spin_hamiltonian(config, config.orientations[o]);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h);
    // |0> is row index 1 in the |+1>, |0>, |-1> basis.
    int zero_state = 0;
    double best = -1.0;
    for (int k = 0; k < 3; ++k) {
      const double overlap = std::norm(es.eigenvectors()(1, k));
      if (overlap > best) {
        best = overlap;
        zero_state = k;
      }
    }
    std::array<double, 2> freqs;
    int n = 0;
    for (int k = 0; k < 3; ++k)
      if (k != zero_state)
        freqs[n++] = std::abs(es.eigenvalues()[k] - es.eigenvalues()[zero_state]);
    std::sort(freqs.begin(), freqs.end());
    lines.push_back({freqs[0], o, -1});
    lines.push_back({freqs[1], o, +1});
  }
  std::sort(lines.begin(), lines.end(), [](const ResonanceLine& a, const ResonanceLine& b) {
    if (a.frequency != b.frequency) return a.frequency < b.frequency;
    return a.orientation < b.orientation;
  });
  return lines;
}

OdmrSpectrum spectrum(const SpinSystemConfig& config, const std::vector<double>& grid,
                      const std::vector<double>& line_weights, Exec exec) {
  for (size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1])
      throw validation_error("spectrum: frequency grid must be sorted ascending");
  if (config.contrast_vis > 0.0 || config.contrast_ir < 0.0)
    throw validation_error("spectrum: expected contrast_vis <= 0 and contrast_ir >= 0");

  OdmrSpectrum out;
  out.lines = resonance_frequencies(config);
  if (!line_weights.empty() && line_weights.size() != out.lines.size())
    throw validation_error("spectrum: line_weights must match the line count");

  const int n = static_cast<int>(grid.size());
  out.frequency = grid;
  out.visible.assign(n, 1.0);
  out.ir.assign(n, 1.0);

  auto body = [&](int i) {
    double acc = 0.0;
    for (size_t k = 0; k < out.lines.size(); ++k) {
      const double w = line_weights.empty() ? 1.0 : line_weights[k];
      acc += w * lorentzian_unit_peak(grid[i], out.lines[k].frequency, config.linewidth);
    }
    out.visible[i] = 1.0 + config.contrast_vis * acc;
    out.ir[i] = 1.0 + config.contrast_ir * acc;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) body(i);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
  return out;
}

std::pair<double, double> contrast_from_rates(const rate::RateConfig& config, double mw_transfer) {
  if (mw_transfer < 0.0 || mw_transfer > 1.0)
    throw validation_error("contrast_from_rates: mw_transfer must be in [0,1]");
  config.validate();

  const rate::RateMatrix base = rate::build_rate_matrix(config);
  const rate::Vector6d p_off = rate::steady_state(base);
  const auto [vis_off, ir_off] = rate::emission_rates(p_off, config);
  if (mw_transfer == 0.0) return {0.0, 0.0};

  // Resonant drive as extra ground-state mixing, same degeneracy-weighted
  // convention as the T1 term; the scale saturates the transfer at
  // mw_transfer = 1 relative to the optical polarization rate.
  const double drive = mw_transfer * 10.0 * (config.pump_rate + 3.0 * config.g_spin_relax);
  rate::RateMatrix driven = base;
  auto add = [&driven](int from, int to, double r) {
    driven.m(to, from) += r;
    driven.m(from, from) -= r;
  };
  add(rate::G0, rate::G1, 2.0 * drive);
  add(rate::G1, rate::G0, drive);

  const rate::Vector6d p_on = rate::steady_state(driven);
  const auto [vis_on, ir_on] = rate::emission_rates(p_on, config);

  const double vis_contrast = vis_off > 0.0 ? (vis_on - vis_off) / vis_off : 0.0;
  const double ir_contrast = ir_off > 0.0 ? (ir_on - ir_off) / ir_off : 0.0;
  return {vis_contrast, ir_contrast};
}

}  // namespace nvs::odmr
