#ifndef DIMERBATH_CONFIG_HPP
#define DIMERBATH_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimerbath/simulate.hpp"

namespace dimerbath {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Smoothing and kernel settings for the spectral command.
struct SpectralSettings {
  double delta_omega = 0;  // 0 means automatic (three mean mode spacings)
  double kernel_dt = 0.1;
  double kernel_t_max = 500;
};

/// Everything a command needs, resolved from one config file.
struct RunSettings {
  ScenarioConfig scenario;
  SpectralSettings spectral;
  double t_max = 500;
  double dt = 1.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& text, const std::string& key, int line) {
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line) + ": value '" + text + "' for key '" + key +
                      "' is not a number");
  }
}

inline int parse_int(const std::string& text, const std::string& key, int line) {
  double v = parse_number(text, key, line);
  int i = static_cast<int>(v);
  if (i != v)
    throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' needs an integer");
  return i;
}

/// "all", or a comma list of 1-based indices and inclusive ranges "a-b".
inline std::vector<int> parse_site_list(const std::string& text, int line) {
  if (text == "all") return {};
  std::vector<int> sites;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw ConfigError("line " + std::to_string(line) + ": empty site entry");
    size_t dash = tok.find('-');
    if (dash != std::string::npos && dash > 0) {
      int a = parse_int(trim(tok.substr(0, dash)), "observed_sites", line);
      int b = parse_int(trim(tok.substr(dash + 1)), "observed_sites", line);
      if (b < a) throw ConfigError("line " + std::to_string(line) + ": descending site range");
      for (int s = a; s <= b; ++s) sites.push_back(s);
    } else {
      sites.push_back(parse_int(tok, "observed_sites", line));
    }
  }
  if (sites.empty())
    throw ConfigError("line " + std::to_string(line) + ": observed_sites is empty");
  return sites;
}

}  // namespace detail

/// Line-oriented "key = value" parser with sections [chain] [system]
/// [initial] [run]. Unknown sections or keys are errors, as are missing
/// required physics keys.
inline RunSettings load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);

  static const std::map<std::string, std::set<std::string>> known = {
      {"chain", {"n", "omega0", "g", "h"}},
      {"system", {"omega_s", "kappa"}},
      {"initial", {"temperature", "squeezing"}},
      {"run",
       {"t_max", "dt", "observed_sites", "front_threshold", "confine_ratio",
        "ballistic_min_sites", "ballistic_min_r2", "oscillation_floor", "profile_fit_window",
        "delta_omega", "kernel_dt", "kernel_t_max"}},
  };

  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> values;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(line) + ": unterminated section");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (!known.count(section))
        throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section + "]");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value', got '" + s + "'");
    std::string key = detail::trim(s.substr(0, eq));
    std::string val = detail::trim(s.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' outside any section");
    if (!known.at(section).count(key))
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "' in [" +
                        section + "]");
    if (val.empty())
      throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' has empty value");
    if (values[section].count(key))
      throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    values[section][key] = {val, line};
  }

  auto require = [&](const std::string& sec, const std::string& key) {
    auto s = values.find(sec);
    if (s == values.end() || !s->second.count(key))
      throw ConfigError("missing required key '" + key + "' in section [" + sec + "]");
    return s->second.at(key);
  };
  auto optional = [&](const std::string& sec, const std::string& key,
                      std::pair<std::string, int> fallback) {
    auto s = values.find(sec);
    if (s == values.end() || !s->second.count(key)) return fallback;
    return s->second.at(key);
  };

  RunSettings rs;
  {
    auto [v, l] = require("chain", "n");
    rs.scenario.chain.n = detail::parse_int(v, "n", l);
  }
  {
    auto [v, l] = require("chain", "omega0");
    rs.scenario.chain.omega0 = detail::parse_number(v, "omega0", l);
  }
  {
    auto [v, l] = require("chain", "g");
    rs.scenario.chain.g = detail::parse_number(v, "g", l);
  }
  {
    auto [v, l] = require("chain", "h");
    rs.scenario.chain.h = detail::parse_number(v, "h", l);
  }
  {
    auto [v, l] = require("system", "omega_s");
    rs.scenario.sys.omega_s = detail::parse_number(v, "omega_s", l);
  }
  {
    auto [v, l] = require("system", "kappa");
    rs.scenario.sys.kappa = detail::parse_number(v, "kappa", l);
  }
  {
    auto [v, l] = optional("initial", "temperature", {"0", 0});
    rs.scenario.temperature = detail::parse_number(v, "temperature", l);
  }
  {
    auto [v, l] = optional("initial", "squeezing", {"0.35", 0});
    rs.scenario.squeezing = detail::parse_number(v, "squeezing", l);
  }
  {
    auto [v, l] = optional("run", "t_max", {"500", 0});
    rs.t_max = detail::parse_number(v, "t_max", l);
  }
  {
    auto [v, l] = optional("run", "dt", {"1", 0});
    rs.dt = detail::parse_number(v, "dt", l);
  }
  rs.scenario.t_grid = make_time_grid(rs.t_max, rs.dt);
  {
    auto [v, l] = optional("run", "observed_sites", {"all", 0});
    rs.scenario.observed_sites = detail::parse_site_list(v, l);
  }
  {
    auto [v, l] = optional("run", "front_threshold", {"0.05", 0});
    rs.scenario.front_threshold = detail::parse_number(v, "front_threshold", l);
  }
  {
    auto [v, l] = optional("run", "confine_ratio", {"0.01", 0});
    rs.scenario.confine_ratio = detail::parse_number(v, "confine_ratio", l);
  }
  {
    auto [v, l] = optional("run", "ballistic_min_sites", {"30", 0});
    rs.scenario.ballistic_min_sites = detail::parse_int(v, "ballistic_min_sites", l);
  }
  {
    auto [v, l] = optional("run", "ballistic_min_r2", {"0.99", 0});
    rs.scenario.ballistic_min_r2 = detail::parse_number(v, "ballistic_min_r2", l);
  }
  {
    auto [v, l] = optional("run", "oscillation_floor", {"0.01", 0});
    rs.scenario.oscillation_floor = detail::parse_number(v, "oscillation_floor", l);
  }
  {
    auto [v, l] = optional("run", "profile_fit_window", {"2-20", 0});
    size_t dash = v.find('-');
    if (dash == std::string::npos)
      throw ConfigError("line " + std::to_string(l) + ": profile_fit_window needs 'lo-hi'");
    rs.scenario.profile_fit_lo = detail::parse_int(detail::trim(v.substr(0, dash)), "profile_fit_window", l);
    rs.scenario.profile_fit_hi = detail::parse_int(detail::trim(v.substr(dash + 1)), "profile_fit_window", l);
  }
  {
    auto [v, l] = optional("run", "delta_omega", {"auto", 0});
    rs.spectral.delta_omega = (v == "auto") ? 0 : detail::parse_number(v, "delta_omega", l);
  }
  {
    auto [v, l] = optional("run", "kernel_dt", {"0.1", 0});
    rs.spectral.kernel_dt = detail::parse_number(v, "kernel_dt", l);
  }
  {
    auto [v, l] = optional("run", "kernel_t_max", {"500", 0});
    rs.spectral.kernel_t_max = detail::parse_number(v, "kernel_t_max", l);
  }

  rs.scenario.validate();
  return rs;
}

}  // namespace dimerbath

#endif
