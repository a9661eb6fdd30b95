#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rydflux/coupling.hpp"
#include "rydflux/geometry.hpp"
#include "rydflux/optimizer.hpp"

namespace rydflux {

struct LatticeConfig {
  int p = 7;
  int q = 4;
  double a_over_b = 1.0;
  std::optional<std::vector<AncillaOffset>> b_offsets;  // default: uniform, x_s = s c

  LatticeSpec to_spec() const;
  static LatticeConfig from_spec(const LatticeSpec& spec);
};

struct WindingConfig {
  double c_over_a = 4.0 / 7.0;
  int samples = 512;
};

struct CriticalConfig {
  double lo = 0.2;
  double hi = 3.0;
  double rel_tol = 1e-6;
};

struct OptimizeConfig {
  int rounds = 40;
  double tol = 1e-5;
  int lambda_points = 21;
  OptimizerOptions options;
};

struct BandsConfig {
  int path_points = 64;
  int chern_grid = 24;
  std::string grouping = "merge_touching";
};

struct DosConfig {
  int grid = 48;
  double broadening = 0.0;  // 0: 2% of the bandwidth
  int points = 0;           // 0: automatic
};

struct TorusConfig {
  int lx = 4;
  int ly = 4;
  double nu = 0.5;
};

struct CouplingsConfig {
  int lx = 4;
  int ly = 4;
};

struct SolverConfig {
  int nev = 6;
  int ncv = 24;
  double tol = 1e-10;
  int max_restarts = 1000;
  double memory_budget_gb = 16.0;
};

struct EdConfig {
  TorusConfig torus;
  std::string axis = "x";
  double fixed_angle = 3.14159265358979323846;
  int points = 11;
};

struct ChernConfig {
  TorusConfig torus;
  int grid = 11;
  int manifold_dim = 2;
  double degeneracy_ratio = 0.1;
  double gap_tol = 1e-2;
};

struct RunConfig {
  LatticeConfig lattice;
  CouplingParams coupling;
  CouplingMode mode = CouplingMode::nearest_neighbor;
  WindingConfig winding;
  CriticalConfig critical;
  OptimizeConfig optimize;
  BandsConfig bands;
  DosConfig dos;
  CouplingsConfig couplings;
  SolverConfig solver;
  EdConfig ed;
  ChernConfig chern;
  std::string output_dir = "out";
  std::uint64_t seed = 12345;
  int threads = 0;  // 0: hardware concurrency

  int resolved_threads() const;
};

/// Throws ConfigError naming the first unknown or mistyped key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Fully resolved config, all defaults included.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const LatticeSpec& spec);

}  // namespace rydflux
