#ifndef DIMERBATH_BATHSTATS_HPP
#define DIMERBATH_BATHSTATS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dimerbath/chain.hpp"

namespace dimerbath {

struct KernelSamples {
  Eigen::VectorXd t;
  Eigen::VectorXd gamma;
};

struct SpectrumSamples {
  Eigen::VectorXd omega;
  Eigen::VectorXd j;
};

/// Discrete spectral weights plus smoothed J(omega) and sampled gamma(t).
struct BathSpectrum {
  std::vector<std::pair<double, double>> weights;  // (omega_i, g_i^2/omega_i)
  SpectrumSamples smoothed_j;
  KernelSamples kernel;
  double delta_omega = 0;
};

inline Eigen::VectorXd uniform_grid(double lo, double hi, int count) {
  if (count < 2 || !(hi > lo)) throw std::invalid_argument("uniform_grid: bad range");
  Eigen::VectorXd x(count);
  for (int i = 0; i < count; ++i) x(i) = lo + (hi - lo) * i / (count - 1);
  return x;
}

/// Default Gaussian smoothing width: three mean eigenfrequency spacings.
inline double auto_smoothing_width(const Eigen::VectorXd& omegas) {
  const int n = static_cast<int>(omegas.size());
  if (n < 2) throw std::invalid_argument("auto_smoothing_width: need at least two modes");
  return 3.0 * (omegas(n - 1) - omegas(0)) / (n - 1);
}

/// Damping kernel gamma(t) = sum_i (g_i/omega_i)^2 cos(omega_i t),
/// evaluated exactly at each grid time.
inline Eigen::VectorXd damping_kernel(const Eigen::VectorXd& gs, const Eigen::VectorXd& omegas,
                                      const Eigen::VectorXd& t_grid) {
  if (gs.size() != omegas.size()) throw std::invalid_argument("damping_kernel: length mismatch");
  for (int i = 0; i < omegas.size(); ++i)
    if (!(omegas(i) > 0)) throw std::invalid_argument("damping_kernel: frequencies must be > 0");
  Eigen::VectorXd out(t_grid.size());
  for (int k = 0; k < t_grid.size(); ++k) {
    double acc = 0;
    for (int i = 0; i < omegas.size(); ++i) {
      double w = gs(i) / omegas(i);
      acc += w * w * std::cos(omegas(i) * t_grid(k));
    }
    out(k) = acc;
  }
  return out;
}

/// Spectral density J(omega) = sum_i g_i^2/omega_i delta(omega-omega_i),
/// with each delta spread by a normalized Gaussian of width delta_omega.
inline Eigen::VectorXd spectral_density_binned(const Eigen::VectorXd& gs,
                                               const Eigen::VectorXd& omegas,
                                               const Eigen::VectorXd& omega_grid,
                                               double delta_omega) {
  if (gs.size() != omegas.size())
    throw std::invalid_argument("spectral_density_binned: length mismatch");
  if (omega_grid.size() >= 2 && !(delta_omega > omega_grid(1) - omega_grid(0)))
    throw std::invalid_argument("spectral_density_binned: delta_omega must exceed grid spacing");
  const double norm = 1.0 / (delta_omega * std::sqrt(2 * M_PI));
  Eigen::VectorXd out(omega_grid.size());
  for (int k = 0; k < omega_grid.size(); ++k) {
    double acc = 0;
    for (int i = 0; i < omegas.size(); ++i) {
      double x = (omega_grid(k) - omegas(i)) / delta_omega;
      acc += gs(i) * gs(i) / omegas(i) * norm * std::exp(-0.5 * x * x);
    }
    out(k) = acc;
  }
  return out;
}

/// J(omega) recovered from the damping kernel:
///   J(omega) = (2 omega / pi) int_0^tmax dt gamma(t) hann(t) cos(omega t),
/// by trapezoidal quadrature. The Hann taper suppresses truncation
/// ringing; the effective smoothing width is about pi/t_max. The 2/pi
/// factor normalizes the cosine transform so that a single mode of weight
/// g^2/omega comes back with the same integrated weight.
inline Eigen::VectorXd spectral_from_kernel(const KernelSamples& kernel, double t_max,
                                            const Eigen::VectorXd& omega_grid) {
  const int nt = static_cast<int>(kernel.t.size());
  if (nt < 2 || kernel.gamma.size() != nt)
    throw std::invalid_argument("spectral_from_kernel: bad kernel samples");
  if (!(t_max > 0) || kernel.t(nt - 1) < t_max * (1 - 1e-12))
    throw std::invalid_argument("spectral_from_kernel: kernel samples do not cover t_max");
  Eigen::VectorXd hann(nt);
  for (int k = 0; k < nt; ++k)
    hann(k) = kernel.t(k) <= t_max ? 0.5 * (1 + std::cos(M_PI * kernel.t(k) / t_max)) : 0.0;
  Eigen::VectorXd out(omega_grid.size());
  for (int m = 0; m < omega_grid.size(); ++m) {
    double w = omega_grid(m);
    double acc = 0;
    for (int k = 0; k + 1 < nt; ++k) {
      double f0 = kernel.gamma(k) * hann(k) * std::cos(w * kernel.t(k));
      double f1 = kernel.gamma(k + 1) * hann(k + 1) * std::cos(w * kernel.t(k + 1));
      acc += 0.5 * (f0 + f1) * (kernel.t(k + 1) - kernel.t(k));
    }
    out(m) = 2 * w / M_PI * acc;
  }
  return out;
}

/// Assemble weights, smoothed density and kernel for a diagonalized bath.
inline BathSpectrum bath_spectrum(const NormalModes& bath_modes, double kappa,
                                  double delta_omega = 0, double kernel_dt = 0.1,
                                  double kernel_t_max = 500) {
  const Eigen::VectorXd& w = bath_modes.frequencies;
  Eigen::VectorXd gs = mode_couplings(bath_modes, kappa);
  BathSpectrum spec;
  spec.delta_omega = delta_omega > 0 ? delta_omega : auto_smoothing_width(w);
  for (int i = 0; i < w.size(); ++i) spec.weights.emplace_back(w(i), gs(i) * gs(i) / w(i));

  const double lo = std::max(1e-6, w(0) - 8 * spec.delta_omega);
  const double hi = w(w.size() - 1) + 8 * spec.delta_omega;
  const int nw = std::max(64, static_cast<int>(std::ceil((hi - lo) / (spec.delta_omega / 4))) + 1);
  spec.smoothed_j.omega = uniform_grid(lo, hi, nw);
  spec.smoothed_j.j = spectral_density_binned(gs, w, spec.smoothed_j.omega, spec.delta_omega);

  const int nt = static_cast<int>(std::round(kernel_t_max / kernel_dt)) + 1;
  spec.kernel.t = uniform_grid(0.0, kernel_t_max, nt);
  spec.kernel.gamma = damping_kernel(gs, w, spec.kernel.t);
  return spec;
}

/// Flatness report for the g = h chain against the Ohmic form J ~ omega.
struct OhmicReport {
  double cutoff = 0;              // 2 sqrt(g)
  double highest_mode = 0;        // largest bath eigenfrequency
  double cutoff_rel_error = 0;    // |highest_mode - sqrt(omega0^2+4g)| / cutoff
  double fitted_level = 0;        // constant fit of J/omega on the window
  double max_rel_deviation = 0;   // of J/omega from the fit, on [0.1, 0.4] cutoff
  double tail_fraction = 0;       // max J beyond 1.05 cutoff over peak J
};

inline OhmicReport ohmic_limit_check(double g, int n = 225, double omega0 = 1e-3,
                                     double kappa = 1e-4, double delta_omega = 0) {
  ChainParams chain{n, omega0, g, g};
  NormalModes modes = diagonalize(build_bath_potential(chain));
  Eigen::VectorXd gs = mode_couplings(modes, kappa);
  const Eigen::VectorXd& w = modes.frequencies;

  OhmicReport rep;
  rep.cutoff = 2 * std::sqrt(g);
  rep.highest_mode = w(w.size() - 1);
  rep.cutoff_rel_error =
      std::abs(rep.highest_mode - std::sqrt(omega0 * omega0 + 4 * g)) / rep.cutoff;

  const double dw = delta_omega > 0 ? delta_omega : auto_smoothing_width(w);
  Eigen::VectorXd grid = uniform_grid(1e-6, 1.3 * rep.cutoff, 2048);
  Eigen::VectorXd j = spectral_density_binned(gs, w, grid, dw);

  double mean = 0;
  int count = 0;
  for (int k = 0; k < grid.size(); ++k)
    if (grid(k) >= 0.1 * rep.cutoff && grid(k) <= 0.4 * rep.cutoff) {
      mean += j(k) / grid(k);
      ++count;
    }
  if (count == 0) throw std::runtime_error("ohmic_limit_check: empty fit window");
  mean /= count;
  rep.fitted_level = mean;
  for (int k = 0; k < grid.size(); ++k)
    if (grid(k) >= 0.1 * rep.cutoff && grid(k) <= 0.4 * rep.cutoff)
      rep.max_rel_deviation =
          std::max(rep.max_rel_deviation, std::abs(j(k) / grid(k) - mean) / mean);

  double peak = j.maxCoeff();
  for (int k = 0; k < grid.size(); ++k)
    if (grid(k) > 1.05 * rep.cutoff) rep.tail_fraction = std::max(rep.tail_fraction, j(k) / peak);
  return rep;
}

}  // namespace dimerbath

#endif
