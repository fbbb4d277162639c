// Command-line driver: modes | spectral | evolve | sweep.
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dimerbath/cli.hpp"
#include "dimerbath/config.hpp"

namespace {

std::vector<std::pair<std::string, double>> parse_omega_list(const std::string& list) {
  std::vector<std::pair<std::string, double>> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = dimerbath::detail::trim(tok);
    if (tok.empty()) continue;
    try {
      size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("");
      out.emplace_back(tok, v);
    } catch (...) {
      throw std::invalid_argument("--omega-s entry '" + tok + "' is not a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic oscillator coupled to a finite dimerized chain: exact Gaussian dynamics"};
  app.set_version_flag("--version", std::string(dimerbath::kVersionString));
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", omega_list;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--threads", threads, "worker threads for time evolution")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* modes = app.add_subcommand("modes", "chain eigenfrequencies and band edges");
  add_common(modes);
  CLI::App* spectral = app.add_subcommand("spectral", "spectral density and damping kernel");
  add_common(spectral);
  CLI::App* evolve = app.add_subcommand("evolve", "time evolution of energy and correlations");
  add_common(evolve);
  CLI::App* sweep = app.add_subcommand("sweep", "evolve for a list of system frequencies");
  add_common(sweep);
  sweep->add_option("--omega-s", omega_list, "comma-separated system frequencies")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    dimerbath::RunSettings settings = dimerbath::load_config(config_path);
    if (modes->parsed()) {
      dimerbath::cmd_modes(settings, out_dir);
    } else if (spectral->parsed()) {
      dimerbath::cmd_spectral(settings, out_dir);
    } else if (evolve->parsed()) {
      dimerbath::cmd_evolve(settings, out_dir, threads);
    } else if (sweep->parsed()) {
      auto list = parse_omega_list(omega_list);
      if (list.empty()) throw std::invalid_argument("--omega-s list is empty");
      dimerbath::cmd_sweep(settings, out_dir, list, threads);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
