#pragma once

#include <span>
#include <vector>

#include "rydflux/coupling.hpp"

namespace rydflux {

/// Plaquette fluxes of a nearest-neighbor torus graph. Plaquettes are indexed
/// by the (col, row) of their lower-left site, flux index = row * lx + col.
struct FluxField {
  int lx = 0;
  int ly = 0;
  std::vector<double> plaquette_fluxes;  // wrapped to (-pi, pi]
  double mean_flux = 0.0;
  double variance = 0.0;  // normalized, see normalized_variance(); NaN for zero mean flux
  int total_quanta = 0;   // flux quanta per magnetic unit cell

  double at(int col, int row) const { return plaquette_fluxes[row * lx + col]; }
};

struct HomogeneityStats {
  double flux_variance_normalized = 0.0;
  double hop_variance_normalized = 0.0;
  double mean_hop = 0.0;
  double mean_flux = 0.0;
};

/// C[x] = (E[x^2] - E[x]^2) / E[x]^2. Throws NumericalError on a zero mean.
double normalized_variance(std::span<const double> values);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double phi);

/// Counterclockwise loop phase around the plaquette with lower-left site
/// (col, row).
double plaquette_flux(const CouplingGraph& graph, int col, int row);

/// Flux quanta through one magnetic unit cell, from the unwrapped phase of
/// the vertical hop as the bond sweeps across q*b (256 samples per c).
int total_flux_quanta(const LatticeSpec& spec, const CouplingParams& params, int samples_per_period = 256);

FluxField flux_field(const CouplingGraph& graph, const CouplingParams& params);

/// Flux field without the (costly) flux-quanta sweep; total_quanta is left 0.
FluxField plaquette_fluxes(const CouplingGraph& graph);

HomogeneityStats stats(const CouplingGraph& graph, const FluxField& fluxes);

/// Same statistics computed directly from one magnetic unit cell (q
/// horizontal bonds, q vertical bonds, q plaquettes); identical to the torus
/// values by periodicity.
HomogeneityStats cell_stats(const LatticeSpec& spec, const CouplingParams& params);

/// Nearest-neighbor amplitudes and fluxes of one magnetic cell.
struct CellBonds {
  std::vector<cplx> horizontal;  // site m -> m + 1
  std::vector<cplx> vertical;    // site m -> m + a y
  std::vector<double> fluxes;    // plaquette with lower-left site m
};

CellBonds cell_bonds(const LatticeSpec& spec, const CouplingParams& params);

}  // namespace rydflux
