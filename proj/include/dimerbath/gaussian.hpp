#ifndef DIMERBATH_GAUSSIAN_HPP
#define DIMERBATH_GAUSSIAN_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimerbath/chain.hpp"

namespace dimerbath {

/// Second moments of a zero-mean Gaussian state over n_modes modes, in
/// block order (q_1..q_M, p_1..p_M). Vacuum normalization: a ground-state
/// oscillator of frequency w has <q^2> = 1/(2w), <p^2> = w/2 (hbar = 1),
/// symplectic eigenvalue 1/2.
struct CovarianceState {
  int n_modes = 0;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd mean;  // zero throughout; kept for completeness

  CovarianceState() = default;
  explicit CovarianceState(int modes)
      : n_modes(modes),
        sigma(Eigen::MatrixXd::Zero(2 * modes, 2 * modes)),
        mean(Eigen::VectorXd::Zero(2 * modes)) {}

  auto qq() { return sigma.topLeftCorner(n_modes, n_modes); }
  auto qp() { return sigma.topRightCorner(n_modes, n_modes); }
  auto pp() { return sigma.bottomRightCorner(n_modes, n_modes); }
  auto qq() const { return sigma.topLeftCorner(n_modes, n_modes); }
  auto qp() const { return sigma.topRightCorner(n_modes, n_modes); }
  auto pp() const { return sigma.bottomRightCorner(n_modes, n_modes); }
};

/// Canonical symplectic form in (q..., p...) block order.
inline Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  omega.topRightCorner(n_modes, n_modes) = Eigen::MatrixXd::Identity(n_modes, n_modes);
  omega.bottomLeftCorner(n_modes, n_modes) = -Eigen::MatrixXd::Identity(n_modes, n_modes);
  return omega;
}

/// Gibbs state of the bath Hamiltonian in the site basis. At T = 0 the
/// thermal factor coth(w/2T) reduces to 1.
inline CovarianceState thermal_covariance(const NormalModes& bath_modes, double temperature) {
  if (temperature < 0) throw std::invalid_argument("thermal_covariance: temperature must be >= 0");
  const int n = static_cast<int>(bath_modes.frequencies.size());
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    double w = bath_modes.frequencies(i);
    if (!(w > 0)) throw std::invalid_argument("thermal_covariance: mode frequency must be > 0");
    c(i) = temperature > 0 ? 1.0 / std::tanh(w / (2 * temperature)) : 1.0;
  }
  const Eigen::MatrixXd& o = bath_modes.modes;
  CovarianceState state(n);
  state.qq() = o * (c.array() / (2 * bath_modes.frequencies.array())).matrix().asDiagonal() *
               o.transpose();
  state.pp() = o * (c.array() * bath_modes.frequencies.array() / 2).matrix().asDiagonal() *
               o.transpose();
  return state;
}

/// Single-mode squeezed vacuum, position-squeezed for r > 0:
/// sigma = diag(e^{-2r}/(2w), w e^{2r}/2). Pure for every r.
inline CovarianceState squeezed_vacuum_covariance(double omega_s, double r) {
  if (!(omega_s > 0)) throw std::invalid_argument("squeezed_vacuum_covariance: omega_s must be > 0");
  CovarianceState state(1);
  state.sigma(0, 0) = std::exp(-2 * r) / (2 * omega_s);
  state.sigma(1, 1) = omega_s * std::exp(2 * r) / 2;
  return state;
}

/// Direct sum of two uncorrelated states.
inline CovarianceState product_state(const CovarianceState& a, const CovarianceState& b) {
  CovarianceState out(a.n_modes + b.n_modes);
  out.qq().topLeftCorner(a.n_modes, a.n_modes) = a.qq();
  out.qq().bottomRightCorner(b.n_modes, b.n_modes) = b.qq();
  out.qp().topLeftCorner(a.n_modes, a.n_modes) = a.qp();
  out.qp().bottomRightCorner(b.n_modes, b.n_modes) = b.qp();
  out.pp().topLeftCorner(a.n_modes, a.n_modes) = a.pp();
  out.pp().bottomRightCorner(b.n_modes, b.n_modes) = b.pp();
  out.sigma.bottomLeftCorner(out.n_modes, out.n_modes) =
      out.sigma.topRightCorner(out.n_modes, out.n_modes).transpose();
  return out;
}

/// Linear phase-space map of the evolution over time t.
struct SymplecticPropagator {
  Eigen::MatrixXd s;
  double t = 0;
};

/// Exact propagator of the quadratic Hamiltonian with normal modes
/// (w_i, O): in blocks, q(t) = C q + D p, p(t) = E q + C p with
/// C = O cos(wt) O^T, D = O sin(wt)/w O^T, E = -O w sin(wt) O^T.
inline SymplecticPropagator propagator(const NormalModes& full_modes, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("propagator: t must be finite");
  const Eigen::VectorXd& w = full_modes.frequencies;
  const Eigen::MatrixXd& o = full_modes.modes;
  const int m = static_cast<int>(w.size());
  Eigen::ArrayXd wt = w.array() * t;
  Eigen::VectorXd c = wt.cos().matrix();
  Eigen::VectorXd s = wt.sin().matrix();
  SymplecticPropagator prop;
  prop.t = t;
  prop.s.resize(2 * m, 2 * m);
  prop.s.topLeftCorner(m, m) = o * c.asDiagonal() * o.transpose();
  prop.s.topRightCorner(m, m) = o * (s.array() / w.array()).matrix().asDiagonal() * o.transpose();
  prop.s.bottomLeftCorner(m, m) =
      o * (-(s.array() * w.array())).matrix().asDiagonal() * o.transpose();
  prop.s.bottomRightCorner(m, m) = prop.s.topLeftCorner(m, m);
  return prop;
}

/// sigma(t) = S sigma S^T, symmetrized against roundoff.
inline CovarianceState evolve(const CovarianceState& state, const SymplecticPropagator& prop) {
  if (prop.s.rows() != state.sigma.rows())
    throw std::invalid_argument("evolve: propagator dimension " + std::to_string(prop.s.rows()) +
                                " does not match state dimension " +
                                std::to_string(state.sigma.rows()));
  CovarianceState out(state.n_modes);
  out.sigma = prop.s * state.sigma * prop.s.transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.mean = prop.s * state.mean;
  return out;
}

/// Reduced state over the given modes (0-based, distinct), preserving
/// block order.
inline CovarianceState reduce(const CovarianceState& state, const std::vector<int>& mode_indices) {
  const int m = static_cast<int>(mode_indices.size());
  for (int i = 0; i < m; ++i) {
    int idx = mode_indices[i];
    if (idx < 0 || idx >= state.n_modes)
      throw std::out_of_range("reduce: mode index " + std::to_string(idx) + " out of range");
    for (int j = i + 1; j < m; ++j)
      if (mode_indices[j] == idx) throw std::invalid_argument("reduce: duplicate mode index");
  }
  CovarianceState out(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      int ia = mode_indices[a], ib = mode_indices[b];
      out.sigma(a, b) = state.sigma(ia, ib);
      out.sigma(a, m + b) = state.sigma(ia, state.n_modes + ib);
      out.sigma(m + a, b) = state.sigma(state.n_modes + ia, ib);
      out.sigma(m + a, m + b) = state.sigma(state.n_modes + ia, state.n_modes + ib);
    }
  return out;
}

/// Symplectic spectrum: moduli of the eigenvalues of i Omega sigma, one
/// per mode, ascending. Physical states have every value >= 1/2.
inline Eigen::VectorXd symplectic_eigenvalues(const CovarianceState& state) {
  const int m = state.n_modes;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(state.sigma);
  if (es.info() != Eigen::Success) throw std::runtime_error("symplectic_eigenvalues: eigensolver failed");
  if (!(es.eigenvalues()(0) > 0))
    throw std::runtime_error("symplectic_eigenvalues: covariance not positive definite");
  Eigen::MatrixXd half = es.operatorSqrt();
  Eigen::MatrixXd a = half * symplectic_form(m) * half;  // skew-symmetric
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(a.transpose() * a);
  if (es2.info() != Eigen::Success) throw std::runtime_error("symplectic_eigenvalues: eigensolver failed");
  Eigen::VectorXd lam = es2.eigenvalues();  // nu_j^2, each twice, ascending
  Eigen::VectorXd nu(m);
  for (int j = 0; j < m; ++j) nu(j) = std::sqrt(std::max(0.0, 0.5 * (lam(2 * j) + lam(2 * j + 1))));
  for (int j = 0; j < m; ++j)
    if (nu(j) < 0.5 - 1e-6)
      throw std::runtime_error("non-physical covariance state: symplectic eigenvalue " +
                               std::to_string(nu(j)));
  return nu;
}

/// Entropy contribution of one symplectic eigenvalue,
/// f(nu) = (nu+1/2) ln(nu+1/2) - (nu-1/2) ln(nu-1/2), with f(1/2) = 0.
inline double entropy_term(double nu) {
  if (nu <= 0.5) return 0.0;
  const double a = nu + 0.5, b = nu - 0.5;
  return a * std::log(a) - b * std::log(b);
}

/// Von Neumann entropy in nats.
inline double von_neumann_entropy(const CovarianceState& state) {
  Eigen::VectorXd nu = symplectic_eigenvalues(state);
  double s = 0;
  for (int j = 0; j < nu.size(); ++j) s += entropy_term(nu(j));
  return s;
}

/// Mutual information I(a:b) = S(a) + S(b) - S(ab). Raw values in
/// (-1e-9, 0) are roundoff and clipped to zero; anything more negative is
/// an inconsistency and rejected.
inline double mutual_information(const CovarianceState& state, int a, int b) {
  if (a == b) throw std::invalid_argument("mutual_information: modes must differ");
  double i = von_neumann_entropy(reduce(state, {a})) + von_neumann_entropy(reduce(state, {b})) -
             von_neumann_entropy(reduce(state, {a, b}));
  if (i < 0) {
    if (i <= -1e-9)
      throw std::runtime_error("mutual_information: negative beyond roundoff: " + std::to_string(i));
    i = 0;
  }
  return i;
}

}  // namespace dimerbath

#endif
