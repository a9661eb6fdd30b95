#include "rydflux/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rydflux/errors.hpp"

namespace rydflux {

namespace {

struct Evaluation {
  HomogeneityStats stats;
  double min_hop = 0.0;
};

Evaluation evaluate(const LatticeSpec& spec, const CouplingParams& params) {
  const CellBonds bonds = cell_bonds(spec, params);
  std::vector<double> amps;
  for (const auto& t : bonds.horizontal) amps.push_back(std::abs(t));
  for (const auto& t : bonds.vertical) amps.push_back(std::abs(t));
  Evaluation e;
  e.min_hop = *std::min_element(amps.begin(), amps.end());
  double sum = 0;
  for (double v : amps) sum += v;
  e.stats.mean_hop = sum / amps.size();
  e.stats.hop_variance_normalized = normalized_variance(amps);
  double fsum = 0;
  for (double v : bonds.fluxes) fsum += v;
  e.stats.mean_flux = fsum / bonds.fluxes.size();
  e.stats.flux_variance_normalized = normalized_variance(bonds.fluxes);
  return e;
}

double objective(const HomogeneityStats& s, Stage stage) {
  return stage == Stage::flux ? s.flux_variance_normalized : s.hop_variance_normalized;
}

bool admissible(const LatticeSpec& trial, const Evaluation& e, int quanta, const CouplingParams& params,
                const OptimizerOptions& opts) {
  if (!(trial.a > 0)) return false;
  if (e.min_hop < opts.min_relative_hop * e.stats.mean_hop) return false;
  CouplingParams barrier = params;
  barrier.b_sum_tolerance = std::max(params.b_sum_tolerance, opts.barrier_sum_tolerance);
  try {
    return total_flux_quanta(trial, barrier) == quanta;
  } catch (const NumericalError&) {
    return false;
  }
}

OptState descend(OptState state, const std::vector<Coordinate>& coords, const CouplingParams& params, double tol,
                 const OptimizerOptions& opts) {
  state.accepted.clear();
  Evaluation current;
  try {
    current = evaluate(state.spec, params);
  } catch (const NumericalError&) {
    return state;
  }
  state.c_flux = current.stats.flux_variance_normalized;
  state.c_hop = current.stats.hop_variance_normalized;
  double f = objective(current.stats, state.stage);
  if (coords.empty() || f < tol) return state;

  std::vector<double> step(coords.size(), opts.initial_step);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      bool accepted = false;
      for (double sign : {+1.0, -1.0}) {
        LatticeSpec trial = state.spec;
        set_coordinate(trial, coords[i], get_coordinate(trial, coords[i]) + sign * step[i]);
        if (!(trial.a > 0)) continue;
        Evaluation e;
        try {
          e = evaluate(trial, params);
        } catch (const NumericalError&) {
          continue;
        }
        const double g = objective(e.stats, state.stage);
        if (!(g < f)) continue;
        if (!admissible(trial, e, state.flux_quanta, params, opts)) continue;
        state.spec = std::move(trial);
        current = e;
        f = g;
        state.accepted.push_back(f);
        accepted = true;
        break;
      }
      step[i] *= accepted ? opts.grow : opts.shrink;
    }
    ++state.iteration;
    if (f < tol) break;
    if (*std::max_element(step.begin(), step.end()) < opts.min_step) break;
  }
  state.c_flux = current.stats.flux_variance_normalized;
  state.c_hop = current.stats.hop_variance_normalized;
  return state;
}

}  // namespace

double get_coordinate(const LatticeSpec& spec, const Coordinate& coord) {
  switch (coord.kind) {
    case Coordinate::Kind::pair_x:
      return spec.b_offsets[coord.site].x;
    case Coordinate::Kind::orbit_z:
      return spec.b_offsets[coord.site].z;
    case Coordinate::Kind::a_over_b:
      return spec.a / spec.b;
  }
  return 0.0;
}

void set_coordinate(LatticeSpec& spec, const Coordinate& coord, double value) {
  switch (coord.kind) {
    case Coordinate::Kind::pair_x: {
      const double delta = value - spec.b_offsets[coord.site].x;
      spec.b_offsets[coord.site].x += delta;
      spec.b_offsets[coord.partner].x -= delta;
      break;
    }
    case Coordinate::Kind::orbit_z:
      spec.b_offsets[coord.site].z = value;
      spec.b_offsets[coord.partner].z = value;
      break;
    case Coordinate::Kind::a_over_b:
      spec.a = value * spec.b;
      break;
  }
}

std::vector<Coordinate> flux_coordinates(const LatticeSpec& spec) {
  const auto partner = mirror_partners(spec);
  if (partner.empty()) throw ConfigError("optimizer needs a reflection-symmetric cell");
  std::vector<Coordinate> out;
  for (int s = 0; s < static_cast<int>(partner.size()); ++s)
    if (s < partner[s]) out.push_back({Coordinate::Kind::pair_x, s, partner[s]});
  return out;
}

std::vector<Coordinate> hopping_coordinates(const LatticeSpec& spec) {
  const auto partner = mirror_partners(spec);
  if (partner.empty()) throw ConfigError("optimizer needs a reflection-symmetric cell");
  std::vector<Coordinate> out{{Coordinate::Kind::a_over_b, -1, -1}};
  for (int s = 0; s < static_cast<int>(partner.size()); ++s)
    if (s <= partner[s]) out.push_back({Coordinate::Kind::orbit_z, s, partner[s]});
  return out;
}

OptState initial_state(const LatticeSpec& spec, const CouplingParams& params) {
  if (!validate_reflection_symmetry(spec)) throw ConfigError("optimizer needs a reflection-symmetric cell");
  OptState st;
  st.spec = spec;
  const auto s = cell_stats(spec, params);
  st.c_flux = s.flux_variance_normalized;
  st.c_hop = s.hop_variance_normalized;
  st.flux_quanta = total_flux_quanta(spec, params);
  return st;
}

OptState optimize_flux(OptState state, const CouplingParams& params, double tol, const OptimizerOptions& opts) {
  if (state.stage != Stage::flux) throw ConfigError("optimize_flux called outside the flux stage");
  const auto coords = flux_coordinates(state.spec);
  return descend(std::move(state), coords, params, tol, opts);
}

OptState optimize_hopping(OptState state, const CouplingParams& params, double tol, const OptimizerOptions& opts,
                          bool clamp_z) {
  if (state.stage != Stage::hopping) throw ConfigError("optimize_hopping called outside the hopping stage");
  auto coords = hopping_coordinates(state.spec);
  if (clamp_z) coords.resize(1);
  return descend(std::move(state), coords, params, tol, opts);
}

LatticeSpec blend(const LatticeSpec& from, const LatticeSpec& to, double lambda) {
  if (from.p != to.p || from.q != to.q || from.b_offsets.size() != to.b_offsets.size())
    throw ConfigError("cannot blend cells of different shape");
  LatticeSpec out = from;
  out.a = (1 - lambda) * from.a + lambda * to.a;
  for (std::size_t s = 0; s < out.b_offsets.size(); ++s) {
    out.b_offsets[s].x = (1 - lambda) * from.b_offsets[s].x + lambda * to.b_offsets[s].x;
    out.b_offsets[s].z = (1 - lambda) * from.b_offsets[s].z + lambda * to.b_offsets[s].z;
  }
  return out;
}

InterpolationTrace interpolation_trace(const LatticeSpec& from, const LatticeSpec& to, const CouplingParams& params,
                                       int points) {
  if (points < 2) throw ConfigError("interpolation trace needs at least two points");
  InterpolationTrace trace;
  for (int k = 0; k < points; ++k) {
    const double lambda = static_cast<double>(k) / (points - 1);
    const auto s = cell_stats(blend(from, to, lambda), params);
    trace.push_back({lambda, s.hop_variance_normalized, s.flux_variance_normalized, s.mean_hop, s.mean_flux});
  }
  return trace;
}

IterateResult iterate(const LatticeSpec& spec, const CouplingParams& params, int rounds, double tol, int lambda_points,
                      const OptimizerOptions& opts) {
  if (rounds < 1) throw ConfigError("optimizer needs at least one round");
  IterateResult res;
  res.initial = spec;
  OptState state = initial_state(spec, params);
  for (int r = 0; r < rounds; ++r) {
    state.stage = Stage::flux;
    state = optimize_flux(std::move(state), params, tol, opts);
    state.stage = Stage::hopping;
    state = optimize_hopping(std::move(state), params, tol, opts);
    res.rounds_used = r + 1;
    if (state.c_flux < tol && state.c_hop < tol) {
      res.converged = true;
      break;
    }
  }
  res.final = state.spec;
  res.state = std::move(state);
  res.trace = interpolation_trace(res.initial, res.final, params, lambda_points);
  return res;
}

}  // namespace rydflux
