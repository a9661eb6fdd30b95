#pragma once

#include <string>
#include <vector>

#include "rydflux/fluxmap.hpp"

namespace rydflux {

enum class Stage { flux, hopping };

/// One free coordinate of a reflection-symmetric cell. A mirror pair moves
/// together (x_s = x, x_t = q b - x; shared z); a/b is a coordinate of its
/// own.
struct Coordinate {
  enum class Kind { pair_x, orbit_z, a_over_b };
  Kind kind = Kind::a_over_b;
  int site = -1;
  int partner = -1;
};

double get_coordinate(const LatticeSpec& spec, const Coordinate& coord);
void set_coordinate(LatticeSpec& spec, const Coordinate& coord, double value);

/// x coordinates of the mirror pairs (sites on a mirror line stay fixed).
std::vector<Coordinate> flux_coordinates(const LatticeSpec& spec);
/// a/b followed by one z per mirror orbit.
std::vector<Coordinate> hopping_coordinates(const LatticeSpec& spec);

struct OptState {
  LatticeSpec spec;
  double c_flux = 0.0;
  double c_hop = 0.0;
  Stage stage = Stage::flux;
  int iteration = 0;
  int flux_quanta = 0;
  /// Active-stage objective after every accepted step of the last stage call.
  std::vector<double> accepted;
};

struct OptimizerOptions {
  double initial_step = 0.02;  // in units of b
  double min_step = 1e-8;
  double grow = 1.5;
  double shrink = 0.5;
  int max_sweeps = 2000;
  /// Relative ancilla-sum tolerance for the flux-quanta barrier sweep.
  double barrier_sum_tolerance = 1e-7;
  /// Steps making any nearest-neighbor |t| smaller than this fraction of the
  /// mean are rejected.
  double min_relative_hop = 1e-3;
};

OptState initial_state(const LatticeSpec& spec, const CouplingParams& params);

OptState optimize_flux(OptState state, const CouplingParams& params, double tol, const OptimizerOptions& opts = {});
OptState optimize_hopping(OptState state, const CouplingParams& params, double tol, const OptimizerOptions& opts = {},
                          bool clamp_z = false);

struct TracePoint {
  double lambda = 0.0;
  double c_hop = 0.0;
  double c_flux = 0.0;
  double mean_hop = 0.0;
  double mean_flux = 0.0;
};

using InterpolationTrace = std::vector<TracePoint>;

/// Pointwise linear blend of a/b and all ancilla offsets.
LatticeSpec blend(const LatticeSpec& from, const LatticeSpec& to, double lambda);

InterpolationTrace interpolation_trace(const LatticeSpec& from, const LatticeSpec& to, const CouplingParams& params,
                                       int points = 21);

struct IterateResult {
  LatticeSpec initial;
  LatticeSpec final;
  OptState state;
  InterpolationTrace trace;
  int rounds_used = 0;
  bool converged = false;
};

/// Alternates the flux and hopping stages (flux first) until both normalized
/// variances are below tol or `rounds` is exhausted. Non-convergence is
/// reported through `converged`, never thrown.
IterateResult iterate(const LatticeSpec& spec, const CouplingParams& params, int rounds, double tol,
                      int lambda_points = 21, const OptimizerOptions& opts = {});

}  // namespace rydflux
