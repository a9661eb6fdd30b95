#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rydflux/coupling.hpp"

namespace rydflux {

using Vec2 = Eigen::Vector2d;

/// H(k) of the magnetic unit cell: H(to, from) = sum_d t(from -> to, d) exp(i k.d)
/// with d the displacement between magnetic cells, so H(k + G) = H(k).
Eigen::MatrixXcd bloch_matrix(const CellGraph& graph, const Vec2& k);

/// N x N grid over [0, 2pi/(q b)) x [0, 2pi/a), k_x fastest.
std::vector<Vec2> k_grid(const LatticeSpec& spec, int nx, int ny);
/// Gamma -> X -> M -> Gamma of the magnetic Brillouin zone.
std::vector<Vec2> k_path(const LatticeSpec& spec, int points_per_segment);

struct BandData {
  std::vector<Vec2> k;
  Eigen::MatrixXd energies;  // rows: k points, columns: bands ascending
  int grid_nx = 0;           // nonzero when k is a k_grid
  int grid_ny = 0;

  int num_bands() const { return static_cast<int>(energies.cols()); }
};

BandData bands(const CellGraph& graph, const std::vector<Vec2>& k);
BandData bands_on_grid(const CellGraph& graph, int nx, int ny);

struct DosPoint {
  double energy = 0.0;
  double density = 0.0;
};

/// Gaussian-broadened density of states normalized to the number of bands.
std::vector<DosPoint> dos(const BandData& data, double broadening, int points = 0);

/// Default broadening: 2% of the total bandwidth.
double default_broadening(const BandData& data);

struct BandGroup {
  int first = 0;
  int count = 1;
  int chern = 0;
};

struct BandTopology {
  std::vector<BandGroup> groups;  // one per band unless bands touch
  std::vector<double> bandwidths;
  std::vector<double> gaps;      // q - 1 indirect gaps min E_{n+1} - max E_n
  std::vector<double> flatness;  // bandwidth / gap to the adjacent band

  /// Chern number of band n if it is isolated.
  std::optional<int> chern_of_band(int n) const;
};

enum class BandGrouping { strict, merge_touching };

/// Chern numbers by the lattice link-variable method on an N x N grid.
/// Strict grouping throws NumericalError when two bands come within 1e-10
/// of each other on the grid; merge_touching computes one non-abelian Chern
/// number per group of touching bands instead.
BandTopology band_chern(const CellGraph& graph, int n, BandGrouping grouping = BandGrouping::strict);

}  // namespace rydflux
