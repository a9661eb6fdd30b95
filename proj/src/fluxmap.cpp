#include "rydflux/fluxmap.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rydflux/errors.hpp"

namespace rydflux {

namespace {

constexpr double kPi = std::numbers::pi;

HomogeneityStats make_stats(std::span<const double> amplitudes, std::span<const double> fluxes) {
  HomogeneityStats s;
  s.hop_variance_normalized = normalized_variance(amplitudes);
  s.flux_variance_normalized = normalized_variance(fluxes);
  double mh = 0, mf = 0;
  for (double v : amplitudes) mh += v;
  for (double v : fluxes) mf += v;
  s.mean_hop = mh / amplitudes.size();
  s.mean_flux = mf / fluxes.size();
  return s;
}

}  // namespace

double wrap_angle(double phi) {
  double r = std::remainder(phi, 2 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2 * kPi;
  return r;
}

double normalized_variance(std::span<const double> values) {
  if (values.empty()) throw NumericalError("normalized variance of an empty set");
  double sum = 0, sum2 = 0;
  for (double v : values) {
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  if (std::fabs(mean) < 1e-300) throw NumericalError("normalized variance undefined: zero mean");
  // Two-pass form; the one-pass E[x^2] - E[x]^2 cancels badly near zero variance.
  double acc = 0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / n / (mean * mean);
}

double plaquette_flux(const CouplingGraph& graph, int col, int row) {
  const auto& lat = graph.lattice;
  const int corner[4] = {lat.index(col, row), lat.index(col + 1, row), lat.index(col + 1, row + 1),
                         lat.index(col, row + 1)};
  const int step[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  cplx loop{1.0, 0.0};
  for (int e = 0; e < 4; ++e) {
    const auto t = directed_amplitude(graph, corner[e], step[e][0], step[e][1]);
    if (!t) {
      std::ostringstream msg;
      msg << "plaquette (" << col << ", " << row << "): missing bond from site " << corner[e] << " along ("
          << step[e][0] << ", " << step[e][1] << ")";
      throw ConfigError(msg.str());
    }
    loop *= *t;
  }
  return wrap_angle(std::arg(loop));
}

int total_flux_quanta(const LatticeSpec& spec, const CouplingParams& params, int samples_per_period) {
  const auto ancillas = AncillaLattice::from_spec(spec);
  const int samples = samples_per_period * spec.p;
  const double L = spec.cell_length();
  const double floor_amp = 1e-12 * params.prefactor() / std::pow(spec.a, 6);
  // On a mirror-symmetric cell t(L - x) = conj(t(x)), so half the sweep suffices.
  const bool mirror = samples % 2 == 0 && validate_reflection_symmetry(spec);
  std::vector<cplx> t(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    if (mirror && 2 * k > samples) {
      t[k] = std::conj(t[samples - k]);
      continue;
    }
    const double x = L * k / samples;
    t[k] = vertical_hop(x, spec.a, ancillas, params);
    if (std::abs(t[k]) < floor_amp) {
      std::ostringstream msg;
      msg << "critical geometry: vertical hop vanishes at x = " << x;
      throw NumericalError(msg.str());
    }
  }
  double total = 0;
  for (int k = 1; k <= samples; ++k) total += std::arg(t[k] / t[k - 1]);
  const double quanta = total / (2 * kPi);
  if (std::fabs(quanta - std::round(quanta)) > 1e-6) throw NumericalError("flux sweep did not close on an integer");
  return static_cast<int>(std::lround(quanta));
}

FluxField plaquette_fluxes(const CouplingGraph& graph) {
  const auto& lat = graph.lattice;
  FluxField f;
  f.lx = lat.lx();
  f.ly = lat.ly();
  f.plaquette_fluxes.reserve(lat.num_sites());
  for (int row = 0; row < lat.ly(); ++row)
    for (int col = 0; col < lat.lx(); ++col) f.plaquette_fluxes.push_back(plaquette_flux(graph, col, row));
  double sum = 0;
  for (double v : f.plaquette_fluxes) sum += v;
  f.mean_flux = sum / f.plaquette_fluxes.size();
  f.variance = std::fabs(f.mean_flux) < 1e-300 ? std::numeric_limits<double>::quiet_NaN()
                                                : normalized_variance(f.plaquette_fluxes);
  return f;
}

FluxField flux_field(const CouplingGraph& graph, const CouplingParams& params) {
  FluxField f = plaquette_fluxes(graph);
  f.total_quanta = total_flux_quanta(graph.lattice.spec(), params);
  return f;
}

HomogeneityStats stats(const CouplingGraph& graph, const FluxField& fluxes) {
  if (graph.mode != CouplingMode::nearest_neighbor) throw ConfigError("homogeneity statistics need a nearest-neighbor graph");
  std::vector<double> amps;
  amps.reserve(graph.couplings.size());
  for (const auto& c : graph.couplings) amps.push_back(std::abs(c.amplitude));
  return make_stats(amps, fluxes.plaquette_fluxes);
}

CellBonds cell_bonds(const LatticeSpec& spec, const CouplingParams& params) {
  const auto ancillas = AncillaLattice::from_spec(spec);
  const int q = spec.q;
  CellBonds out;
  for (int m = 0; m < q; ++m) {
    const Vec3 r(m * spec.b, 0.0, 0.0);
    out.horizontal.push_back(hop_amplitude(r, Vec3((m + 1) * spec.b, 0.0, 0.0), ancillas, params));
    out.vertical.push_back(hop_amplitude(r, Vec3(m * spec.b, spec.a, 0.0), ancillas, params));
  }
  // Rows are translation invariant, so the upper horizontal bond equals the lower one.
  for (int m = 0; m < q; ++m) {
    const cplx loop = out.horizontal[m] * out.vertical[(m + 1) % q] * std::conj(out.horizontal[m]) *
                      std::conj(out.vertical[m]);
    out.fluxes.push_back(wrap_angle(std::arg(loop)));
  }
  return out;
}

HomogeneityStats cell_stats(const LatticeSpec& spec, const CouplingParams& params) {
  const CellBonds bonds = cell_bonds(spec, params);
  std::vector<double> amps;
  for (const auto& t : bonds.horizontal) amps.push_back(std::abs(t));
  for (const auto& t : bonds.vertical) amps.push_back(std::abs(t));
  return make_stats(amps, bonds.fluxes);
}

}  // namespace rydflux
