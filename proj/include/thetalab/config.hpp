#pragma once

// Flat key=value run configuration with include-file support (one level of
// profile nesting is typical: a run file including a tolerance profile).

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thetalab/error.hpp"

namespace thetalab {

struct RunConfig {
  int precision_digits = 50;
  std::vector<int> degrees{8, 10, 12, 14};
  double seed_radius = 0.82;
  double retain_radius = 0.8;
  double z_bound = 25.0;
  double cluster_eps = 1e-8;
  int residual_exp = -30;       // refinement target 10^{exp}
  int boundary_exp = -20;       // lift residual target 10^{exp}
  std::string output_dir = "out";
  std::string format = "json";  // json | csv (json always written; csv mirrors)
  int workers = 1;
  bool deterministic_seed_order = true;  // always on
  std::map<std::string, std::string> tolerances;
};

namespace detail {

inline void parse_config_stream(std::istream& in, const std::string& base_dir,
                                std::map<std::string, std::string>& kv, int depth) {
  if (depth > 8) throw Error(ErrorKind::Usage, "config include nesting too deep");
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "include") {
      std::filesystem::path p(val);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      std::ifstream inc(p);
      if (!inc) throw Error(ErrorKind::Usage, "cannot open config include " + p.string());
      parse_config_stream(inc, p.parent_path().string(), kv, depth + 1);
    } else {
      kv[key] = val;
    }
  }
}

}  // namespace detail

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Usage, "cannot open config file " + path);
  std::map<std::string, std::string> kv;
  detail::parse_config_stream(in, std::filesystem::path(path).parent_path().string(), kv, 0);
  return kv;
}

inline void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (auto& [key, val] : kv) {
    try {
      if (key == "prec" || key == "precision_digits") {
        cfg.precision_digits = std::stoi(val);
      } else if (key == "degrees") {
        cfg.degrees.clear();
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.degrees.push_back(std::stoi(tok));
      } else if (key == "radius" || key == "seed_radius") {
        cfg.seed_radius = std::stod(val);
      } else if (key == "retain" || key == "retain_radius") {
        cfg.retain_radius = std::stod(val);
      } else if (key == "zbound" || key == "z_bound") {
        cfg.z_bound = std::stod(val);
      } else if (key == "cluster_eps") {
        cfg.cluster_eps = std::stod(val);
      } else if (key == "residual_exp") {
        cfg.residual_exp = std::stoi(val);
      } else if (key == "boundary_exp") {
        cfg.boundary_exp = std::stoi(val);
      } else if (key == "out" || key == "output_dir") {
        cfg.output_dir = val;
      } else if (key == "format") {
        cfg.format = val;
      } else if (key == "workers") {
        cfg.workers = std::stoi(val);
      } else if (key.rfind("tol_", 0) == 0) {
        cfg.tolerances[key] = val;
      }  // unknown keys are ignored so profiles can carry extra metadata
    } catch (const std::exception&) {
      throw Error(ErrorKind::Usage, "bad config value for " + key + ": " + val);
    }
  }
  if (cfg.precision_digits < 30)
    throw Error(ErrorKind::Usage, "precision_digits must be >= 30");
}

}  // namespace thetalab
