#ifndef DIMERBATH_CHAIN_HPP
#define DIMERBATH_CHAIN_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace dimerbath {

/// Parameters of the dimerized bath chain: n oscillators with onsite
/// frequency omega0 and alternating nearest-neighbour bond stiffnesses.
/// Bond i (1-based, connecting sites i and i+1) carries g for odd i and
/// h for even i.
struct ChainParams {
  int n = 0;
  double omega0 = 0.0;
  double g = 0.0;
  double h = 0.0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("ChainParams: n must be >= 2, got " + std::to_string(n));
    if (omega0 < 0) throw std::invalid_argument("ChainParams: omega0 must be >= 0");
    if (!(g > 0)) throw std::invalid_argument("ChainParams: g must be > 0");
    if (!(h > 0)) throw std::invalid_argument("ChainParams: h must be > 0");
  }

  /// Stiffness of bond i (1-based), i in [1, n-1].
  double bond(int i) const { return (i % 2 == 1) ? g : h; }
};

/// System oscillator frequency and bilinear coupling -kappa q_S q_1.
struct SystemParams {
  double omega_s = 0.0;
  double kappa = 0.0;

  void validate() const {
    if (!(omega_s > 0)) throw std::invalid_argument("SystemParams: omega_s must be > 0");
    if (kappa < 0) throw std::invalid_argument("SystemParams: kappa must be >= 0");
  }
};

/// Stiffness matrix V of a quadratic Hamiltonian H = p.p/2 + q.V.q/2.
struct PotentialMatrix {
  int dim = 0;
  Eigen::MatrixXd entries;
};

/// Eigenfrequencies (ascending) and orthonormal eigenvectors of a
/// potential matrix: V = modes * diag(frequencies^2) * modes^T.
struct NormalModes {
  Eigen::VectorXd frequencies;
  Eigen::MatrixXd modes;
};

enum class Branch { acoustic, optical };

/// Onsite compensation applied to the chain ends. Each bond contributes
/// its stiffness to both endpoint diagonals, so end sites are short one
/// contribution relative to the bulk.
///
/// first_site (default) adds the missing-bond stiffness at site 1 only
/// and leaves site n free. Compensating both ends (both_sites) restores
/// a uniform diagonal but for odd n the off-diagonal part is then a
/// bipartite matrix of odd dimension with a forced zero eigenvalue: one
/// boundary mode pinned at sqrt(omega0^2+g+h), dead centre of the band
/// gap, localized at the weak-bond end. The first_site choice keeps the
/// gap empty and gives site 1 the fixed-end boundary condition that the
/// low-frequency coupling weights (and the Ohmic limit) require.
enum class EndCorrection { none, first_site, both_sites };

namespace detail {

inline double smallest_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  return es.eigenvalues()(0);
}

inline void require_positive_definite(const Eigen::MatrixXd& m, const std::string& label) {
  double lo = smallest_eigenvalue(m);
  if (!(lo > 0))
    throw std::runtime_error(label + " is not positive definite (smallest eigenvalue " +
                             std::to_string(lo) + ")");
}

}  // namespace detail

/// Bath-only stiffness matrix, n x n, sites 1..n at indices 0..n-1.
inline PotentialMatrix build_bath_potential(const ChainParams& chain,
                                            EndCorrection correction = EndCorrection::first_site) {
  chain.validate();
  const int n = chain.n;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s) v(s, s) = chain.omega0 * chain.omega0;
  for (int i = 1; i < n; ++i) {
    const double k = chain.bond(i);
    v(i - 1, i - 1) += k;
    v(i, i) += k;
    v(i - 1, i) -= k;
    v(i, i - 1) -= k;
  }
  // Missing-bond stiffnesses under periodic continuation of the
  // alternation: bond 0 would carry h, bond n would carry bond(n).
  if (correction == EndCorrection::first_site || correction == EndCorrection::both_sites)
    v(0, 0) += chain.h;
  if (correction == EndCorrection::both_sites) v(n - 1, n - 1) += chain.bond(n);

  detail::require_positive_definite(v, "bath potential");
  return {n, std::move(v)};
}

/// Full (n+1) x (n+1) stiffness matrix; index 0 is the system oscillator,
/// coupled to bath site 1 through the off-diagonal entry -kappa. No
/// counter-term is added: at weak coupling the renormalized system
/// frequency is indistinguishable from omega_s.
inline PotentialMatrix build_full_potential(const ChainParams& chain, const SystemParams& sys,
                                            EndCorrection correction = EndCorrection::first_site) {
  sys.validate();
  PotentialMatrix bath = build_bath_potential(chain, correction);
  const int m = chain.n + 1;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(m, m);
  v(0, 0) = sys.omega_s * sys.omega_s;
  v(0, 1) = v(1, 0) = -sys.kappa;
  v.bottomRightCorner(chain.n, chain.n) = bath.entries;
  detail::require_positive_definite(v, "full potential");
  return {m, std::move(v)};
}

/// Exact diagonalization. Frequencies ascending; eigenvector signs fixed
/// so that each column's largest-magnitude entry is positive (first such
/// entry on ties), making the output deterministic.
inline NormalModes diagonalize(const PotentialMatrix& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v.entries);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  Eigen::VectorXd evals = es.eigenvalues();
  if (!(evals(0) > 0))
    throw std::runtime_error("potential matrix has non-positive eigenvalue " +
                             std::to_string(evals(0)));
  NormalModes nm;
  nm.frequencies = evals.cwiseSqrt();
  nm.modes = es.eigenvectors();
  for (int j = 0; j < nm.modes.cols(); ++j) {
    int imax = 0;
    double best = std::abs(nm.modes(0, j));
    for (int i = 1; i < nm.modes.rows(); ++i) {
      double a = std::abs(nm.modes(i, j));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    if (nm.modes(imax, j) < 0) nm.modes.col(j) = -nm.modes.col(j);
  }

  const int m = v.dim;
  double ortho = (nm.modes.transpose() * nm.modes - Eigen::MatrixXd::Identity(m, m))
                     .cwiseAbs()
                     .maxCoeff();
  if (ortho > 1e-10)
    throw std::runtime_error("eigenvector matrix not orthonormal to tolerance: " +
                             std::to_string(ortho));
  double scale = v.entries.cwiseAbs().maxCoeff();
  double recon = (nm.modes * evals.asDiagonal() * nm.modes.transpose() - v.entries)
                     .cwiseAbs()
                     .maxCoeff();
  if (recon > 1e-8 * scale)
    throw std::runtime_error("eigendecomposition reconstruction error too large");
  return nm;
}

/// Band edges of the dimer dispersion. The gap has zero width for g = h.
struct BandEdges {
  double acoustic_bottom;
  double acoustic_top;
  double optical_bottom;
  double optical_top;
  double gap_width() const { return optical_bottom - acoustic_top; }
};

inline BandEdges band_edges(const ChainParams& chain) {
  chain.validate();
  const double w02 = chain.omega0 * chain.omega0;
  const double lo = std::min(chain.g, chain.h), hi = std::max(chain.g, chain.h);
  return {chain.omega0, std::sqrt(w02 + 2 * lo), std::sqrt(w02 + 2 * hi),
          std::sqrt(w02 + 2 * (chain.g + chain.h))};
}

/// Closed dimer-chain dispersion,
///   omega(k)^2 = omega0^2 + g + h -+ sqrt(g^2 + h^2 + 2 g h cos 2k),
/// with k the momentum per site on (0, pi]; the acoustic branch takes the
/// lower sign. Branches meet the band edges at k -> 0, pi/2 and pi.
inline double dispersion_closed_form(const ChainParams& chain, Branch branch, double k) {
  chain.validate();
  if (!(k > 0) || k > M_PI + 1e-15)
    throw std::invalid_argument("dispersion: k must lie in (0, pi], got " + std::to_string(k));
  const double root = std::sqrt(chain.g * chain.g + chain.h * chain.h +
                                2 * chain.g * chain.h * std::cos(2 * k));
  const double w2 = chain.omega0 * chain.omega0 + chain.g + chain.h +
                    (branch == Branch::acoustic ? -root : root);
  return std::sqrt(w2);
}

/// |d omega / dk| of the closed-form dispersion.
inline double group_velocity(const ChainParams& chain, Branch branch, double k) {
  chain.validate();
  if (!(k > 0) || !(k < M_PI))
    throw std::invalid_argument("group_velocity: k must lie in (0, pi), got " + std::to_string(k));
  const double root = std::sqrt(chain.g * chain.g + chain.h * chain.h +
                                2 * chain.g * chain.h * std::cos(2 * k));
  const double omega = dispersion_closed_form(chain, branch, k);
  if (root == 0)  // g = h and k = pi/2: branches touch, finite limit
    return chain.g * std::abs(std::sin(k)) / omega;
  return std::abs(chain.g * chain.h * std::sin(2 * k) / (root * omega));
}

/// Maximum group velocity of a branch, by dense scan plus golden-section
/// refinement. Deterministic for fixed parameters.
inline double max_group_velocity(const ChainParams& chain, Branch branch) {
  const int coarse = 4096;
  double best_k = 0, best_v = 0;
  for (int i = 1; i < coarse; ++i) {
    double k = M_PI * i / coarse;
    double v = group_velocity(chain, branch, k);
    if (v > best_v) {
      best_v = v;
      best_k = k;
    }
  }
  double a = std::max(1e-12, best_k - M_PI / coarse);
  double b = std::min(M_PI - 1e-12, best_k + M_PI / coarse);
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
    if (group_velocity(chain, branch, c) > group_velocity(chain, branch, d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  double km = 0.5 * (a + b);
  return std::max(best_v, group_velocity(chain, branch, km));
}

/// Couplings g_i = kappa * (site-1 component of bath eigenmode i).
inline Eigen::VectorXd mode_couplings(const NormalModes& bath_modes, double kappa) {
  if (kappa < 0) throw std::invalid_argument("mode_couplings: kappa must be >= 0");
  return kappa * bath_modes.modes.row(0).transpose();
}

/// Per-site momenta realized by the open chain with a fixed end at site 0
/// and a free end past site n: k_j = (2j-1) pi / (2n+1). Exact for g = h;
/// for the dimer the branch switches from acoustic to optical at pi/2.
inline Eigen::VectorXd open_chain_momentum_grid(int n) {
  Eigen::VectorXd k(n);
  for (int j = 1; j <= n; ++j) k(j - 1) = (2.0 * j - 1) * M_PI / (2.0 * n + 1);
  return k;
}

}  // namespace dimerbath

#endif
