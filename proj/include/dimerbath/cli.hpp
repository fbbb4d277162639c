#ifndef DIMERBATH_CLI_HPP
#define DIMERBATH_CLI_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dimerbath/bathstats.hpp"
#include "dimerbath/chain.hpp"
#include "dimerbath/config.hpp"
#include "dimerbath/csv.hpp"
#include "dimerbath/gaussian.hpp"
#include "dimerbath/simulate.hpp"

namespace dimerbath {

inline constexpr std::string_view kVersionString = "dimerbath 1.0.0";

namespace detail {

using ManifestJson = nlohmann::ordered_json;

inline ManifestJson settings_json(const RunSettings& rs, int threads) {
  ManifestJson p;
  p["chain"] = {{"n", rs.scenario.chain.n},
                {"omega0", rs.scenario.chain.omega0},
                {"g", rs.scenario.chain.g},
                {"h", rs.scenario.chain.h}};
  p["system"] = {{"omega_s", rs.scenario.sys.omega_s}, {"kappa", rs.scenario.sys.kappa}};
  p["initial"] = {{"temperature", rs.scenario.temperature},
                  {"squeezing", rs.scenario.squeezing}};
  ManifestJson runj;
  runj["t_max"] = rs.t_max;
  runj["dt"] = rs.dt;
  if (rs.scenario.observed_sites.empty())
    runj["observed_sites"] = "all";
  else
    runj["observed_sites"] = rs.scenario.observed_sites;
  runj["front_threshold"] = rs.scenario.front_threshold;
  runj["confine_ratio"] = rs.scenario.confine_ratio;
  runj["ballistic_min_sites"] = rs.scenario.ballistic_min_sites;
  runj["ballistic_min_r2"] = rs.scenario.ballistic_min_r2;
  runj["oscillation_floor"] = rs.scenario.oscillation_floor;
  runj["profile_fit_window"] =
      std::to_string(rs.scenario.profile_fit_lo) + "-" + std::to_string(rs.scenario.profile_fit_hi);
  runj["delta_omega"] =
      rs.spectral.delta_omega > 0 ? ManifestJson(rs.spectral.delta_omega) : ManifestJson("auto");
  runj["kernel_dt"] = rs.spectral.kernel_dt;
  runj["kernel_t_max"] = rs.spectral.kernel_t_max;
  runj["threads"] = threads;
  p["run"] = runj;
  return p;
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, const RunSettings& rs, int threads,
                 std::filesystem::path out_dir)
      : out_dir_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["version"] = std::string(kVersionString);
    doc_["parameters"] = settings_json(rs, threads);
    doc_["artifacts"] = ManifestJson::array();
    doc_["results"] = ManifestJson::object();
  }

  void add_artifact(const std::string& name) { doc_["artifacts"].push_back(name); }
  ManifestJson& results() { return doc_["results"]; }

  void write() {
    doc_["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(out_dir_ / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << doc_.dump(2) << "\n";
  }

 private:
  ManifestJson doc_;
  std::filesystem::path out_dir_;
  std::chrono::steady_clock::time_point start_;
};

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
}

inline std::string sanitize_token(const std::string& tok) {
  std::string out;
  for (char c : tok)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-')
               ? c
               : '_';
  return out;
}

}  // namespace detail

/// Eigenfrequencies and band edges of the bath chain.
inline void cmd_modes(const RunSettings& rs, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  detail::ManifestWriter manifest("modes", rs, 1, out_dir);
  const std::filesystem::path dir(out_dir);

  NormalModes modes = diagonalize(build_bath_potential(rs.scenario.chain));
  BandEdges edges = band_edges(rs.scenario.chain);

  {
    CsvFile csv((dir / "modes.csv").string());
    csv.header("index,frequency (1/time)");
    for (int i = 0; i < modes.frequencies.size(); ++i)
      csv.row({static_cast<double>(i + 1), modes.frequencies(i)});
    csv.close();
    manifest.add_artifact("modes.csv");
  }
  {
    // exact extremes, split at the gap midpoint
    const double mid = 0.5 * (edges.acoustic_top + edges.optical_bottom);
    double ac_top = 0, op_bot = 0;
    const auto& w = modes.frequencies;
    for (int i = 0; i < w.size(); ++i) {
      if (w(i) <= mid) ac_top = w(i);
      if (w(i) > mid && op_bot == 0) op_bot = w(i);
    }
    CsvFile csv((dir / "bandedges.csv").string());
    csv.header("source,acoustic_bottom,acoustic_top,optical_bottom,optical_top,gap_width");
    csv.raw_row("closed_form," + format_double(edges.acoustic_bottom) + "," +
                format_double(edges.acoustic_top) + "," + format_double(edges.optical_bottom) +
                "," + format_double(edges.optical_top) + "," + format_double(edges.gap_width()));
    csv.raw_row("exact," + format_double(w(0)) + "," + format_double(ac_top) + "," +
                format_double(op_bot) + "," + format_double(w(w.size() - 1)) + "," +
                format_double(op_bot - ac_top));
    csv.close();
    manifest.add_artifact("bandedges.csv");
    manifest.results()["gap"] = {edges.acoustic_top, edges.optical_bottom};
    manifest.results()["gap_width"] = edges.gap_width();
    std::printf("gap: (%.6g, %.6g), width %.6g\n", edges.acoustic_top, edges.optical_bottom,
                edges.gap_width());
  }
  manifest.write();
}

/// Spectral density (two independent estimates) and damping kernel.
inline void cmd_spectral(const RunSettings& rs, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  detail::ManifestWriter manifest("spectral", rs, 1, out_dir);
  const std::filesystem::path dir(out_dir);

  NormalModes modes = diagonalize(build_bath_potential(rs.scenario.chain));
  BathSpectrum spec = bath_spectrum(modes, rs.scenario.sys.kappa, rs.spectral.delta_omega,
                                    rs.spectral.kernel_dt, rs.spectral.kernel_t_max);
  Eigen::VectorXd j_from_kernel =
      spectral_from_kernel(spec.kernel, rs.spectral.kernel_t_max, spec.smoothed_j.omega);

  {
    CsvFile csv((dir / "modes.csv").string());
    csv.header("index,frequency (1/time)");
    for (int i = 0; i < modes.frequencies.size(); ++i)
      csv.row({static_cast<double>(i + 1), modes.frequencies(i)});
    csv.close();
    manifest.add_artifact("modes.csv");
  }
  {
    CsvFile csv((dir / "gamma.csv").string());
    csv.header("t (time),gamma (1/time^2)");
    for (int i = 0; i < spec.kernel.t.size(); ++i) csv.row({spec.kernel.t(i), spec.kernel.gamma(i)});
    csv.close();
    manifest.add_artifact("gamma.csv");
  }
  {
    CsvFile csv((dir / "J_binned.csv").string());
    csv.header("omega (1/time),J (1/time^3)");
    for (int i = 0; i < spec.smoothed_j.omega.size(); ++i)
      csv.row({spec.smoothed_j.omega(i), spec.smoothed_j.j(i)});
    csv.close();
    manifest.add_artifact("J_binned.csv");
  }
  {
    CsvFile csv((dir / "J_from_kernel.csv").string());
    csv.header("omega (1/time),J (1/time^3)");
    for (int i = 0; i < spec.smoothed_j.omega.size(); ++i)
      csv.row({spec.smoothed_j.omega(i), j_from_kernel(i)});
    csv.close();
    manifest.add_artifact("J_from_kernel.csv");
  }
  {
    std::ofstream gp(dir / "plot_spectral.gp", std::ios::binary);
    gp << "# gnuplot script: chain spectrum, spectral density, damping kernel\n"
          "set datafile separator ','\n"
          "set terminal pngcairo size 1500,420\n"
          "set output 'spectral.png'\n"
          "set multiplot layout 1,3\n"
          "set xlabel 'mode index'\n set ylabel 'frequency'\n"
          "plot 'modes.csv' skip 1 using 1:2 with points pt 7 ps 0.3 notitle\n"
          "set xlabel 'omega'\n set ylabel 'J(omega)'\n"
          "plot 'J_binned.csv' skip 1 using 1:2 with lines title 'binned', \\\n"
          "     'J_from_kernel.csv' skip 1 using 1:2 with lines title 'from kernel'\n"
          "set xlabel 't'\n set ylabel 'gamma(t)'\n"
          "plot 'gamma.csv' skip 1 using 1:2 with lines notitle\n"
          "unset multiplot\n";
    manifest.add_artifact("plot_spectral.gp");
  }

  manifest.results()["gamma_at_0"] = spec.kernel.gamma(0);
  manifest.results()["delta_omega_used"] = spec.delta_omega;
  if (rs.scenario.chain.g == rs.scenario.chain.h) {
    OhmicReport rep = ohmic_limit_check(rs.scenario.chain.g, rs.scenario.chain.n,
                                        rs.scenario.chain.omega0, rs.scenario.sys.kappa,
                                        rs.spectral.delta_omega);
    manifest.results()["ohmic"] = {{"cutoff", rep.cutoff},
                                   {"highest_mode", rep.highest_mode},
                                   {"cutoff_rel_error", rep.cutoff_rel_error},
                                   {"fitted_level", rep.fitted_level},
                                   {"max_rel_deviation", rep.max_rel_deviation},
                                   {"tail_fraction", rep.tail_fraction}};
    std::printf("ohmic check: J/omega flat to %.3g on [0.1,0.4]*cutoff, cutoff error %.3g\n",
                rep.max_rel_deviation, rep.cutoff_rel_error);
  }
  std::printf("gamma(0) = %.17g, %zu modes\n", spec.kernel.gamma(0), spec.weights.size());
  manifest.write();
}

/// Full time evolution with per-site energies and mutual information.
/// Returns the classification so callers can aggregate without rerunning.
inline RegimeReport cmd_evolve(const RunSettings& rs, const std::string& out_dir,
                               int threads = 1) {
  detail::ensure_dir(out_dir);
  detail::ManifestWriter manifest("evolve", rs, threads, out_dir);
  const std::filesystem::path dir(out_dir);

  Trajectory traj = run(rs.scenario, threads);
  RegimeReport report = classify_regime(rs.scenario, traj);

  const int nt = static_cast<int>(traj.times.size());
  const int ns = static_cast<int>(traj.sites.size());
  {
    CsvFile csv((dir / "mi.csv").string());
    csv.header("t (time),site,mutual_information (nats)");
    for (int it = 0; it < nt; ++it)
      for (int c = 0; c < ns; ++c)
        csv.row({traj.times(it), static_cast<double>(traj.sites[c]), traj.site_mi(it, c)});
    csv.close();
    manifest.add_artifact("mi.csv");
  }
  {
    CsvFile csv((dir / "energy.csv").string());
    csv.header("t (time),site,excess_energy (1/time)");
    for (int it = 0; it < nt; ++it)
      for (int c = 0; c < ns; ++c)
        csv.row({traj.times(it), static_cast<double>(traj.sites[c]), traj.site_energy(it, c)});
    csv.close();
    manifest.add_artifact("energy.csv");
  }
  {
    CsvFile csv((dir / "system.csv").string());
    csv.header("t (time),system_energy (1/time),system_entropy (nats)");
    for (int it = 0; it < nt; ++it)
      csv.row({traj.times(it), traj.system_energy(it), traj.system_entropy(it)});
    csv.close();
    manifest.add_artifact("system.csv");
  }
  {
    CsvFile csv((dir / "profile.csv").string());
    csv.header("site,max_mutual_information (nats),max_excess_energy (1/time)");
    for (int c = 0; c < ns; ++c)
      csv.row({static_cast<double>(traj.sites[c]), report.profile.max_mi(c),
               report.profile.max_energy(c)});
    csv.close();
    manifest.add_artifact("profile.csv");
  }
  if (report.regime == Regime::ballistic) {
    CsvFile csv((dir / "front.csv").string());
    csv.header("site,arrival_time (time)");
    for (size_t i = 0; i < report.front.arrived_sites.size(); ++i)
      csv.row({static_cast<double>(report.front.arrived_sites[i]), report.front.arrival_times[i]});
    csv.close();
    manifest.add_artifact("front.csv");
  }
  {
    std::ofstream gp(dir / "plot_evolve.gp", std::ios::binary);
    gp << "# gnuplot script: propagation maps and penetration profile\n"
          "set datafile separator ','\n"
          "set terminal pngcairo size 1500,420\n"
          "set output 'evolve.png'\n"
          "set multiplot layout 1,3\n"
          "set view map\n set xlabel 'site'\n set ylabel 't'\n"
          "set title 'I(S:n)'\n"
          "splot 'mi.csv' skip 1 using 2:1:3 with points pt 5 ps 0.4 palette notitle\n"
          "set title 'E(n)'\n"
          "splot 'energy.csv' skip 1 using 2:1:3 with points pt 5 ps 0.4 palette notitle\n"
          "unset view\n set logscale y\n set xlabel 'site'\n set ylabel 'max I(S:n)'\n"
          "set title 'penetration'\n"
          "plot 'profile.csv' skip 1 using 1:2 with linespoints notitle\n"
          "unset multiplot\n";
    manifest.add_artifact("plot_evolve.gp");
  }

  manifest.results()["regime"] = regime_name(report.regime);
  manifest.results()["confinement_ratio"] = report.confinement_ratio;
  manifest.results()["oscillation_count"] = report.oscillation_count;
  if (report.front.fitted) {
    manifest.results()["front_velocity"] = report.front.velocity;
    manifest.results()["front_r2"] = report.front.r_squared;
    manifest.results()["front_sites"] = report.front.arrived_sites.size();
  }
  if (report.profile.fitted) {
    manifest.results()["decay_length"] = report.profile.decay_length;
    manifest.results()["profile_r2"] = report.profile.r_squared;
  }
  manifest.results()["energy_drift"] =
      (traj.total_energy.array() - traj.total_energy(0)).abs().maxCoeff() /
      std::abs(traj.total_energy(0));
  std::printf("omega_s = %.6g: regime %s\n", rs.scenario.sys.omega_s,
              regime_name(report.regime));
  manifest.write();
  return report;
}

/// One evolve per requested system frequency plus a summary table.
inline void cmd_sweep(const RunSettings& rs, const std::string& out_dir,
                      const std::vector<std::pair<std::string, double>>& omega_list,
                      int threads = 1) {
  if (omega_list.empty()) throw std::invalid_argument("sweep: omega_s list is empty");
  detail::ensure_dir(out_dir);
  detail::ManifestWriter manifest("sweep", rs, threads, out_dir);
  const std::filesystem::path dir(out_dir);

  CsvFile summary((dir / "sweep_summary.csv").string());
  summary.header("omega_s (1/time),regime,front_velocity (sites/time),decay_length (sites)");
  std::vector<std::string> subdirs;
  for (const auto& [token, value] : omega_list) {
    RunSettings sub = rs;
    sub.scenario.sys.omega_s = value;
    const std::string name = "omega_s_" + detail::sanitize_token(token);
    RegimeReport report = cmd_evolve(sub, (dir / name).string(), threads);
    subdirs.push_back(name);

    const double vel = report.regime == Regime::ballistic && report.front.fitted
                           ? report.front.velocity
                           : std::nan("");
    const double xi = report.profile.fitted ? report.profile.decay_length : std::nan("");
    summary.raw_row(format_double(value) + "," + regime_name(report.regime) + "," +
                    format_double(vel) + "," + format_double(xi));
  }
  summary.close();
  manifest.add_artifact("sweep_summary.csv");
  for (const auto& s : subdirs) manifest.add_artifact(s + "/");
  {
    std::ofstream gp(dir / "plot_sweep.gp", std::ios::binary);
    gp << "# gnuplot script: penetration profiles across the sweep\n"
          "set datafile separator ','\n"
          "set terminal pngcairo size 800,500\n"
          "set output 'sweep.png'\n"
          "set logscale y\n set xlabel 'site'\n set ylabel 'max I(S:n)'\n"
          "plot";
    bool first = true;
    for (size_t i = 0; i < subdirs.size(); ++i) {
      gp << (first ? " " : ", \\\n     ") << "'" << subdirs[i]
         << "/profile.csv' skip 1 using 1:2 with lines title 'omega_s=" << omega_list[i].first
         << "'";
      first = false;
    }
    gp << "\n";
    manifest.add_artifact("plot_sweep.gp");
  }
  manifest.write();
}

}  // namespace dimerbath

#endif
