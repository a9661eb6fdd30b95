#pragma once

#include <cstdint>
#include <vector>

#include "rydflux/coupling.hpp"
#include "rydflux/errors.hpp"
#include "rydflux/lanczos.hpp"

namespace rydflux {

/// Fixed particle-number sector of hard-core bosons. States are bitmasks
/// (bit k = site k occupied) in ascending order.
class Sector {
 public:
  /// Throws CapacityError when the basis plus `vectors` state vectors would
  /// exceed `memory_budget` bytes.
  Sector(int num_sites, int n_particles, double memory_budget = 16e9, int vectors = 32);

  int num_sites() const { return num_sites_; }
  int n_particles() const { return n_particles_; }
  std::size_t dim() const { return basis_.size(); }
  std::uint64_t state(std::size_t index) const { return basis_[index]; }
  const std::vector<std::uint64_t>& basis() const { return basis_; }

  /// Position of `state` in the basis; O(n_particles).
  std::size_t rank(std::uint64_t state) const;

  static std::uint64_t binomial(int n, int k);
  static double estimate_bytes(std::uint64_t dim, int vectors);

 private:
  int num_sites_;
  int n_particles_;
  std::vector<std::uint64_t> basis_;
};

Sector build_sector(const FiniteLattice& lattice, int n_particles, double memory_budget = 16e9);

/// Particle number nu * (flux quanta through the torus). `flux_quanta_per_cell`
/// is the winding total p*n of one magnetic cell; the per-plaquette flux is
/// its fractional part per plaquette, taken in [-1/2, 1/2).
int particle_count(int flux_quanta_per_cell, int q, int lx, int ly, double nu);
int particle_count(const FiniteLattice& lattice, const CouplingParams& params, double nu);

/// Mean |t| over nearest-neighbor bonds of the graph.
double energy_scale(const CouplingGraph& graph);

struct Twist {
  double theta_x = 0.0;
  double theta_y = 0.0;
};

/// H = sum t_ij b_j^dag b_i with twist phases on wrapping bonds, applied
/// matrix-free.
class ManyBodyHamiltonian {
 public:
  ManyBodyHamiltonian(const Sector& sector, const CouplingGraph& graph, Twist twist, int threads = 1);

  std::size_t dim() const { return sector_->dim(); }
  const Twist& twist() const { return twist_; }
  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  LinearOperator as_operator() const;
  Eigen::MatrixXcd dense() const;
  double max_abs_hop() const { return max_hop_; }

 private:
  struct Incoming {
    int from;
    cplx amplitude;
  };

  void apply_range(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, std::size_t begin, std::size_t end) const;

  const Sector* sector_;
  Twist twist_;
  int threads_;
  double max_hop_ = 0.0;
  std::vector<std::vector<Incoming>> incoming_;  // per destination site
};

struct EDResult {
  Twist twist;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd residuals;  // ||H v - E v|| per pair
};

struct EDOptions {
  LanczosOptions lanczos;
  int threads = 1;
  double memory_budget = 16e9;
};

EDResult lowest_eigs(const ManyBodyHamiltonian& h, const EDOptions& options, const Eigen::MatrixXcd* guess = nullptr);

enum class TwistAxis { x, y };

/// Spectra at `points` twists from 0 to 2pi along one axis, the other held at
/// `fixed_angle`.
std::vector<EDResult> twist_scan(const Sector& sector, const CouplingGraph& graph, TwistAxis axis,
                                 double fixed_angle, int points, const EDOptions& options);

struct ChernOptions {
  double energy_scale = 0.0;       // 0: mean nearest-neighbor |t|
  double degeneracy_ratio = 0.1;   // max splitting below this times min gap
  double gap_tol = 1e-2;           // times energy scale
  double integer_tol = 1e-6;
};

struct ChernResult {
  int grid = 0;
  int manifold_dim = 0;
  int chern = 0;
  double raw_chern = 0.0;
  double energy_scale = 0.0;
  std::vector<double> gap_map;       // E_{m+1} - E_m, index j * grid + i
  std::vector<double> splitting_map;  // E_m - E_1
  std::vector<double> field;          // plaquette field strengths
  std::vector<Eigen::VectorXd> energies;

  double min_gap() const;
  double max_splitting() const;
  /// Splitting of the manifold small against its gap everywhere on the grid.
  bool quasi_degenerate(double ratio) const { return max_splitting() < ratio * min_gap(); }
};

/// Gap closure on the twist grid; carries the computed gap map.
class GapClosureError : public NumericalError {
 public:
  GapClosureError(const std::string& what, std::vector<double> gap_map)
      : NumericalError(what), gap_map(std::move(gap_map)) {}
  std::vector<double> gap_map;
};

/// Non-abelian Chern number of the lowest `manifold_dim` states over an
/// N x N periodic grid of twists theta = 2 pi (i, j) / N.
ChernResult many_body_chern(const Sector& sector, const CouplingGraph& graph, int grid, int manifold_dim,
                            const EDOptions& ed, const ChernOptions& options = {});

}  // namespace rydflux
