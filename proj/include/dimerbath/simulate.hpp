#ifndef DIMERBATH_SIMULATE_HPP
#define DIMERBATH_SIMULATE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dimerbath/chain.hpp"
#include "dimerbath/gaussian.hpp"

namespace dimerbath {

inline Eigen::VectorXd make_time_grid(double t_max, double dt) {
  if (!(t_max > 0) || !(dt > 0)) throw std::invalid_argument("make_time_grid: t_max and dt must be > 0");
  const int n = static_cast<int>(std::round(t_max / dt)) + 1;
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = i * dt;
  return t;
}

/// One full evolution scenario. Sites are 1-based bath indices.
struct ScenarioConfig {
  ChainParams chain;
  SystemParams sys;
  double temperature = 0.0;
  double squeezing = 0.35;
  Eigen::VectorXd t_grid;
  std::vector<int> observed_sites;  // empty means all

  // classification knobs
  double front_threshold = 0.05;    // fraction of the site-1 MI maximum
  double confine_ratio = 0.01;      // confinement bound for sites >= 10
  int ballistic_min_sites = 30;
  double ballistic_min_r2 = 0.99;   // front-fit linearity required for ballistic
  double oscillation_floor = 0.01;  // entropy steps below floor*range are noise
  int profile_fit_lo = 2;
  int profile_fit_hi = 20;

  void validate() const {
    chain.validate();
    sys.validate();
    if (temperature < 0) throw std::invalid_argument("ScenarioConfig: temperature must be >= 0");
    if (t_grid.size() < 2) throw std::invalid_argument("ScenarioConfig: time grid needs >= 2 points");
    if (t_grid(0) != 0) throw std::invalid_argument("ScenarioConfig: time grid must start at 0");
    for (int i = 1; i < t_grid.size(); ++i)
      if (!(t_grid(i) > t_grid(i - 1)))
        throw std::invalid_argument("ScenarioConfig: time grid must be strictly increasing");
    for (int s : observed_sites)
      if (s < 1 || s > chain.n)
        throw std::invalid_argument("ScenarioConfig: observed site " + std::to_string(s) +
                                    " out of range 1.." + std::to_string(chain.n));
    if (!(front_threshold > 0) || front_threshold >= 1)
      throw std::invalid_argument("ScenarioConfig: front_threshold must lie in (0,1)");
  }

  std::vector<int> sites() const {
    if (!observed_sites.empty()) return observed_sites;
    std::vector<int> all(chain.n);
    for (int i = 0; i < chain.n; ++i) all[i] = i + 1;
    return all;
  }
};

/// Time-indexed observables of one run. Energies are excess over the
/// t = 0 baseline; mutual information rows at t = 0 vanish.
struct Trajectory {
  Eigen::VectorXd times;
  std::vector<int> sites;
  Eigen::MatrixXd site_energy;  // times x sites
  Eigen::MatrixXd site_mi;      // times x sites
  Eigen::VectorXd system_entropy;
  Eigen::VectorXd system_energy;
  Eigen::VectorXd total_energy;

  int site_column(int site) const {
    for (size_t c = 0; c < sites.size(); ++c)
      if (sites[c] == site) return static_cast<int>(c);
    throw std::out_of_range("Trajectory: site " + std::to_string(site) + " not observed");
  }
};

/// Local excess energy of bath site n (1-based):
/// E_n = <p_n^2>/2 + (omega0^2+g+h)<q_n^2>/2 minus the same at t = 0.
/// The onsite stiffness matches the bulk diagonal of V; bond cross-terms
/// are excluded, so a travelling packet's E_n sum tracks, but does not
/// exactly equal, the energy the system sheds.
inline double site_energy(const CovarianceState& state, const ChainParams& chain, int site,
                          double baseline) {
  if (site < 1 || site > chain.n) throw std::out_of_range("site_energy: site out of range");
  const int m = state.n_modes;
  const double onsite = chain.omega0 * chain.omega0 + chain.g + chain.h;
  return 0.5 * state.sigma(m + site, m + site) + 0.5 * onsite * state.sigma(site, site) - baseline;
}

/// <H> = tr(sigma_pp)/2 + tr(V sigma_qq)/2. Conserved exactly by the
/// dynamics; serves as the conservation oracle.
inline double total_energy(const CovarianceState& state, const PotentialMatrix& v) {
  if (state.n_modes != v.dim) throw std::invalid_argument("total_energy: dimension mismatch");
  return 0.5 * state.pp().trace() + 0.5 * (v.entries * state.qq()).trace();
}

namespace detail {

/// Assemble the covariance of (system, site n) from extracted slices.
inline CovarianceState two_mode_state(double qq0, double qqn, double qq0n, double qp00, double qpnn,
                                      double qp0n, double qpn0, double pp0, double ppn,
                                      double pp0n) {
  CovarianceState s(2);
  s.sigma << qq0, qq0n, qp00, qp0n,
             qq0n, qqn, qpn0, qpnn,
             qp00, qpn0, pp0, pp0n,
             qp0n, qpnn, pp0n, ppn;
  return s;
}

inline CovarianceState one_mode_state(double qq, double qp, double pp) {
  CovarianceState s(1);
  s.sigma << qq, qp, qp, pp;
  return s;
}

}  // namespace detail

/// Run a scenario. The state is propagated exactly from t = 0 to every
/// output time (no step composition): with the full normal modes (w, O)
/// the propagator factorizes through the mode basis, so each output time
/// costs three dense products instead of a full 2M x 2M sandwich. The
/// observables agree with gaussian::evolve to roundoff.
inline Trajectory run(const ScenarioConfig& config, int threads = 1) {
  config.validate();
  const int n = config.chain.n;
  const int m = n + 1;

  PotentialMatrix bath_v = build_bath_potential(config.chain);
  NormalModes bath_modes = diagonalize(bath_v);
  PotentialMatrix full_v = build_full_potential(config.chain, config.sys);
  NormalModes full_modes = diagonalize(full_v);
  const Eigen::MatrixXd& o = full_modes.modes;
  const Eigen::VectorXd& w = full_modes.frequencies;

  CovarianceState initial =
      product_state(squeezed_vacuum_covariance(config.sys.omega_s, config.squeezing),
                    thermal_covariance(bath_modes, config.temperature));

  // initial second moments in the full normal-mode basis; sigma_qp(0) = 0
  Eigen::MatrixXd mode_qq = o.transpose() * initial.qq() * o;
  Eigen::MatrixXd mode_pp = o.transpose() * initial.pp() * o;

  const std::vector<int> sites = config.sites();
  const int ns = static_cast<int>(sites.size());
  const int nt = static_cast<int>(config.t_grid.size());
  const double onsite = config.chain.omega0 * config.chain.omega0 + config.chain.g + config.chain.h;

  // Baselines evaluated through the same mode-basis round trip as the
  // trajectory, so the t = 0 excess is exactly zero.
  Eigen::VectorXd energy_baseline(n + 1);
  {
    Eigen::MatrixXd b0qq = o * mode_qq;
    Eigen::MatrixXd b0pp = o * mode_pp;
    Eigen::VectorXd dqq0 = b0qq.cwiseProduct(o).rowwise().sum();
    Eigen::VectorXd dpp0 = b0pp.cwiseProduct(o).rowwise().sum();
    for (int s = 0; s <= n; ++s)
      energy_baseline(s) = 0.5 * dpp0(s) +
                           0.5 * (s == 0 ? config.sys.omega_s * config.sys.omega_s : onsite) *
                               dqq0(s);
  }

  Trajectory traj;
  traj.times = config.t_grid;
  traj.sites = sites;
  traj.site_energy.resize(nt, ns);
  traj.site_mi.resize(nt, ns);
  traj.system_entropy.resize(nt);
  traj.system_energy.resize(nt);
  traj.total_energy.resize(nt);

  auto eval_time = [&](int it) {
    const double t = config.t_grid(it);
    Eigen::ArrayXd wt = w.array() * t;
    Eigen::VectorXd c = wt.cos().matrix();
    Eigen::VectorXd s = wt.sin().matrix();
    Eigen::VectorXd d = (s.array() / w.array()).matrix();
    Eigen::VectorXd e = (-s.array() * w.array()).matrix();

    Eigen::MatrixXd aqq = c.asDiagonal() * mode_qq * c.asDiagonal() +
                          d.asDiagonal() * mode_pp * d.asDiagonal();
    Eigen::MatrixXd aqp = c.asDiagonal() * mode_qq * e.asDiagonal() +
                          d.asDiagonal() * mode_pp * c.asDiagonal();
    Eigen::MatrixXd app = e.asDiagonal() * mode_qq * e.asDiagonal() +
                          c.asDiagonal() * mode_pp * c.asDiagonal();

    Eigen::MatrixXd bqq = o * aqq;
    Eigen::MatrixXd bqp = o * aqp;
    Eigen::MatrixXd bpp = o * app;

    // site-basis slices of sigma(t) = O A O^T per block
    Eigen::VectorXd dqq = bqq.cwiseProduct(o).rowwise().sum();
    Eigen::VectorXd dpp = bpp.cwiseProduct(o).rowwise().sum();
    Eigen::VectorXd dqp = bqp.cwiseProduct(o).rowwise().sum();
    Eigen::VectorXd row0_qq = (bqq.row(0) * o.transpose()).transpose();
    Eigen::VectorXd row0_pp = (bpp.row(0) * o.transpose()).transpose();
    Eigen::VectorXd row0_qp = (bqp.row(0) * o.transpose()).transpose();
    Eigen::VectorXd col0_qp = bqp * o.row(0).transpose();
    Eigen::VectorXd super_qq =
        bqq.topRows(m - 1).cwiseProduct(o.bottomRows(m - 1)).rowwise().sum();

    double te = 0.5 * dpp.sum();
    for (int i = 0; i < m; ++i) te += 0.5 * full_v.entries(i, i) * dqq(i);
    for (int i = 0; i + 1 < m; ++i) te += full_v.entries(i, i + 1) * super_qq(i);
    traj.total_energy(it) = te;

    traj.system_energy(it) = 0.5 * dpp(0) +
                             0.5 * config.sys.omega_s * config.sys.omega_s * dqq(0);
    const double s_system =
        von_neumann_entropy(detail::one_mode_state(dqq(0), dqp(0), dpp(0)));
    traj.system_entropy(it) = s_system;

    for (int col = 0; col < ns; ++col) {
      const int site = sites[col];
      traj.site_energy(it, col) =
          0.5 * dpp(site) + 0.5 * onsite * dqq(site) - energy_baseline(site);
      const double s_site =
          von_neumann_entropy(detail::one_mode_state(dqq(site), dqp(site), dpp(site)));
      const double s_joint = von_neumann_entropy(
          detail::two_mode_state(dqq(0), dqq(site), row0_qq(site), dqp(0), dqp(site),
                                 row0_qp(site), col0_qp(site), dpp(0), dpp(site),
                                 row0_pp(site)));
      double mi = s_system + s_site - s_joint;
      if (mi < 0) {
        if (mi <= -1e-9)
          throw std::runtime_error("run: mutual information negative beyond roundoff");
        mi = 0;
      }
      traj.site_mi(it, col) = mi;
    }
  };

  if (threads <= 1) {
    for (int it = 0; it < nt; ++it) eval_time(it);
  } else {
    const int workers = std::min(threads, nt);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (int wk = 0; wk < workers; ++wk)
      pool.emplace_back([&, wk] {
        try {
          for (int it = wk; it < nt; it += workers) eval_time(it);
        } catch (...) {
          errors[wk] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  return traj;
}

/// Least-squares front fit: site index against first threshold crossing.
struct FrontFit {
  bool fitted = false;
  std::vector<int> arrived_sites;
  std::vector<double> arrival_times;
  double velocity = 0;       // sites per unit time
  double intercept = 0;
  double r_squared = 0;
  double residual_rms = 0;
};

/// Arrival at site n is the first grid time at which I(S:n) reaches
/// threshold_fraction times the site-1 maximum and holds it for two
/// consecutive samples. Fewer than 10 arrivals, or a non-advancing fit,
/// reports unfit.
inline FrontFit fit_front(const Trajectory& traj, double threshold_fraction) {
  if (!(threshold_fraction > 0) || threshold_fraction >= 1)
    throw std::invalid_argument("fit_front: threshold fraction must lie in (0,1)");
  FrontFit fit;
  const int nt = static_cast<int>(traj.times.size());
  const double ref = traj.site_mi.col(traj.site_column(1)).maxCoeff();
  if (!(ref > 0)) return fit;
  const double thr = threshold_fraction * ref;
  for (size_t col = 0; col < traj.sites.size(); ++col) {
    for (int it = 0; it + 1 < nt; ++it) {
      if (traj.site_mi(it, col) >= thr && traj.site_mi(it + 1, col) >= thr) {
        fit.arrived_sites.push_back(traj.sites[col]);
        fit.arrival_times.push_back(traj.times(it));
        break;
      }
    }
  }
  const int m = static_cast<int>(fit.arrived_sites.size());
  if (m < 10) return fit;

  double st = 0, sn = 0, stt = 0, stn = 0;
  for (int i = 0; i < m; ++i) {
    st += fit.arrival_times[i];
    sn += fit.arrived_sites[i];
    stt += fit.arrival_times[i] * fit.arrival_times[i];
    stn += fit.arrival_times[i] * fit.arrived_sites[i];
  }
  const double denom = m * stt - st * st;
  if (denom <= 0) return fit;
  fit.velocity = (m * stn - st * sn) / denom;
  fit.intercept = (sn - fit.velocity * st) / m;
  if (fit.velocity <= 0) return fit;

  double ssr = 0, sst = 0;
  const double mean_n = sn / m;
  for (int i = 0; i < m; ++i) {
    double pred = fit.intercept + fit.velocity * fit.arrival_times[i];
    ssr += (fit.arrived_sites[i] - pred) * (fit.arrived_sites[i] - pred);
    sst += (fit.arrived_sites[i] - mean_n) * (fit.arrived_sites[i] - mean_n);
  }
  fit.r_squared = sst > 0 ? 1 - ssr / sst : 0;
  fit.residual_rms = std::sqrt(ssr / m);
  fit.fitted = true;
  return fit;
}

/// Per-site maxima over the run and an exponential fit
/// ln maxMI(n) = a - n/xi over the requested site window.
struct PenetrationProfile {
  Eigen::VectorXd max_mi;      // per observed site
  Eigen::VectorXd max_energy;  // per observed site
  bool fitted = false;
  double decay_length = 0;     // xi; negative slope means growth
  double r_squared = 0;
  double log_intercept = 0;
};

inline PenetrationProfile penetration_profile(const Trajectory& traj, int fit_lo, int fit_hi) {
  PenetrationProfile prof;
  prof.max_mi = traj.site_mi.colwise().maxCoeff();
  prof.max_energy = traj.site_energy.colwise().maxCoeff();

  // points at the numerical noise floor carry no shape information
  const double floor = std::max(1e-13, 1e-12 * prof.max_mi.maxCoeff());
  std::vector<double> xs, ys;
  for (size_t col = 0; col < traj.sites.size(); ++col) {
    int n = traj.sites[col];
    if (n >= fit_lo && n <= fit_hi && prof.max_mi(col) > floor) {
      xs.push_back(n);
      ys.push_back(std::log(prof.max_mi(col)));
    }
  }
  const int m = static_cast<int>(xs.size());
  if (m < 3) return prof;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom <= 0) return prof;
  const double slope = (m * sxy - sx * sy) / denom;
  prof.log_intercept = (sy - slope * sx) / m;
  double ssr = 0, sst = 0;
  const double mean_y = sy / m;
  for (int i = 0; i < m; ++i) {
    double pred = prof.log_intercept + slope * xs[i];
    ssr += (ys[i] - pred) * (ys[i] - pred);
    sst += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  prof.r_squared = sst > 0 ? 1 - ssr / sst : 0;
  prof.decay_length = slope != 0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
  prof.fitted = true;
  return prof;
}

enum class Regime { confined, dressed_edge, ballistic };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::confined: return "confined";
    case Regime::dressed_edge: return "dressed-edge";
    case Regime::ballistic: return "ballistic";
  }
  return "unknown";
}

/// Sign changes of the stepwise entropy increments, ignoring steps
/// smaller than floor_fraction of the series range. Separates persistent
/// breathing (many flips at a few percent of range) from a decaying
/// ripple on a monotone rise.
inline int entropy_oscillation_count(const Eigen::VectorXd& series, double floor_fraction) {
  const double range = series.maxCoeff() - series.minCoeff();
  if (!(range > 0)) return 0;
  const double floor = floor_fraction * range;
  int count = 0, last_sign = 0;
  for (int i = 0; i + 1 < series.size(); ++i) {
    const double step = series(i + 1) - series(i);
    if (std::abs(step) <= floor) continue;
    const int sign = step > 0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++count;
    last_sign = sign;
  }
  return count;
}

struct RegimeReport {
  Regime regime = Regime::confined;
  FrontFit front;
  PenetrationProfile profile;
  double confinement_ratio = 0;  // max over sites >= 10 of maxMI(n)/maxMI(1)
  int oscillation_count = 0;
};

/// Three-way classification. Ballistic requires a linear front over at
/// least ballistic_min_sites sites; an evanescent cloud also crosses the
/// threshold at many sites but decelerates, so linearity (r_squared) is
/// part of the test. Confined means no site beyond 10 ever reaches
/// confine_ratio of the site-1 maximum.
inline RegimeReport classify_regime(const ScenarioConfig& config, const Trajectory& traj) {
  RegimeReport rep;
  rep.front = fit_front(traj, config.front_threshold);
  rep.profile = penetration_profile(traj, config.profile_fit_lo, config.profile_fit_hi);
  rep.oscillation_count = entropy_oscillation_count(traj.system_entropy, config.oscillation_floor);

  const double ref = traj.site_mi.col(traj.site_column(1)).maxCoeff();
  rep.confinement_ratio = 0;
  for (size_t col = 0; col < traj.sites.size(); ++col)
    if (traj.sites[col] >= 10 && ref > 0)
      rep.confinement_ratio = std::max(rep.confinement_ratio, rep.profile.max_mi(col) / ref);

  if (rep.front.fitted &&
      static_cast<int>(rep.front.arrived_sites.size()) >= config.ballistic_min_sites &&
      rep.front.r_squared >= config.ballistic_min_r2) {
    rep.regime = Regime::ballistic;
  } else if (rep.confinement_ratio < config.confine_ratio) {
    rep.regime = Regime::confined;
  } else {
    rep.regime = Regime::dressed_edge;
  }
  return rep;
}

}  // namespace dimerbath

#endif
