#pragma once

#include <random>

#include "rydflux/geometry.hpp"

namespace fixtures {

// Sign changes of the midpoint vertical hop, one ancilla per period, from the
// plain box sum in oracle.hpp.
constexpr double kCriticalLow = 0.4176301658;
constexpr double kCriticalHigh = 1.993065718;

// Endpoint of the default two-stage optimization of the 7/4 cell
// (C[flux] = 5.8e-6, C[|t|] = 6.7e-6, mean |t| = 28.056).
inline rydflux::LatticeSpec optimized_spec() {
  rydflux::LatticeSpec s;
  s.p = 7;
  s.q = 4;
  s.a = 0.8557385183916659;
  s.b = 1.0;
  s.b_offsets = {{0.0, 0.298336344098508},
                 {0.45549107142857137, 0.0638297414779663},
                 {1.1653571428571428, 0.3563272908161997},
                 {1.776785714285714, 0.16419818211434548},
                 {2.223214285714285, 0.16419818211434548},
                 {2.834642857142857, 0.3563272908161997},
                 {3.544508928571428, 0.0638297414779663}};
  return s;
}

// Random reflection-symmetric displacement: each mirror pair moves by
// (+dx, -dx) in x and a shared dz; sites on the mirror line move in z only.
inline rydflux::LatticeSpec perturbed(const rydflux::LatticeSpec& base, double max_dx, double max_dz,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto partner = rydflux::mirror_partners(base);
  rydflux::LatticeSpec s = base;
  for (int k = 0; k < static_cast<int>(partner.size()); ++k) {
    const int m = partner[k];
    if (m < k) continue;
    const double dz = max_dz * u(rng);
    s.b_offsets[k].z += dz;
    if (m == k) continue;
    const double dx = max_dx * u(rng);
    s.b_offsets[k].x += dx;
    s.b_offsets[m].x -= dx;
    s.b_offsets[m].z += dz;
  }
  return s;
}

}  // namespace fixtures
