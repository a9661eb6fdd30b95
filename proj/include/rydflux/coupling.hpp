#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rydflux/geometry.hpp"

namespace rydflux {

using cplx = std::complex<double>;

/// Parameters of the second-order hopping. With w = mu = 1 amplitudes come
/// out in units of w^2 / (mu b^6).
struct CouplingParams {
  double w = 1.0;
  double mu = 1.0;
  double t_minus = 0.0;
  double cutoff_radius = 5.0;
  double b_sum_tolerance = 1e-10;

  double prefactor() const { return w * w / mu; }
  void validate() const;
};

enum class CouplingMode { nearest_neighbor, long_range };

std::string to_string(CouplingMode mode);
CouplingMode parse_coupling_mode(const std::string& name);

/// Infinite periodic arrangement of ancillas: `basis` positions repeated on a
/// rectangular grid with periods (period_x, period_y).
struct AncillaLattice {
  double period_x = 1.0;
  double period_y = 1.0;
  std::vector<Vec3> basis;

  static AncillaLattice from_spec(const LatticeSpec& spec);
  /// One ancilla per (c, a) cell at (0, a/2, 0).
  static AncillaLattice rectangular(double c, double a);
};

/// Signed in-plane angle between R_is and R_sj; the sign follows the z
/// component of R_ij x R_is.
double second_order_phase(const Vec3& R_is, const Vec3& R_sj, const Vec3& R_ij);

/// Amplitude of the hop ri -> rj through a finite set of ancillas.
cplx hop_amplitude(const Vec3& ri, const Vec3& rj, std::span<const Vec3> ancillas, const CouplingParams& params);

/// Amplitude of the hop ri -> rj through an infinite ancilla lattice. The
/// ancilla sum runs over square shells around the bond midpoint and stops once
/// a shell changes the total by less than b_sum_tolerance (relative).
cplx hop_amplitude(const Vec3& ri, const Vec3& rj, const AncillaLattice& ancillas, const CouplingParams& params);

/// Hop from site `from` of cell (0, 0) to site `to` of the cell shifted by
/// (cell_shift, row_shift) magnetic unit cells.
struct CellCoupling {
  int from = 0;
  int to = 0;
  int cell_shift = 0;
  int row_shift = 0;
  cplx amplitude;

  int dcol(int q) const { return to + cell_shift * q - from; }
};

/// Couplings of one magnetic unit cell to its periodic images, both hop
/// directions stored.
struct CellGraph {
  LatticeSpec spec;
  CouplingMode mode = CouplingMode::nearest_neighbor;
  std::vector<CellCoupling> couplings;
};

CellGraph assemble_cell_graph(const LatticeSpec& spec, const CouplingParams& params, CouplingMode mode);

/// One bond of a finite torus; (dcol, drow) is the unwrapped lattice
/// displacement from i to j. `amplitude` is the hop i -> j, the reverse hop
/// is its conjugate.
struct Coupling {
  int i = 0;
  int j = 0;
  int dcol = 0;
  int drow = 0;
  cplx amplitude;
};

struct CouplingGraph {
  FiniteLattice lattice;
  CouplingMode mode = CouplingMode::nearest_neighbor;
  std::vector<Coupling> couplings;
};

/// Places every bond of the cell graph on the torus, once per unordered bond.
CouplingGraph fold(const CellGraph& cell, const FiniteLattice& lattice);

CouplingGraph assemble_graph(const FiniteLattice& lattice, const CouplingParams& params, CouplingMode mode);

/// Amplitude of the hop from `site` along (dcol, drow), or nullopt when the
/// graph has no such bond.
std::optional<cplx> directed_amplitude(const CouplingGraph& graph, int site, int dcol, int drow);

/// Single-particle matrix h with h(j, i) = amplitude of the hop i -> j. A hop
/// that wraps the torus in the positive x (y) direction picks up
/// exp(i theta_x) (exp(i theta_y)) per wrap.
Eigen::MatrixXcd hopping_matrix(const CouplingGraph& graph, double theta_x = 0.0, double theta_y = 0.0);

/// Plain-text edge list, one line `i j re(t) im(t)` per bond.
void write_edge_list(std::ostream& out, const CouplingGraph& graph);
std::vector<Coupling> read_edge_list(std::istream& in);

struct WindingProfile {
  double c_over_a = 0.0;
  std::vector<double> x;
  std::vector<cplx> t;
  std::vector<double> phase_unwrapped;
  int n = 0;
};

/// Amplitude of the vertical hop (x, 0) -> (x, a) inside `ancillas`.
cplx vertical_hop(double x, double a, const AncillaLattice& ancillas, const CouplingParams& params);

/// Phase of the vertical hop while the pair is translated across one ancilla
/// period c of a rectangular (c, a) ancilla lattice, a = 1.
WindingProfile winding_profile(double c_over_a, const CouplingParams& params, int samples = 512);

/// Ratios c/a inside [lo, hi] where the hop at the mirror point x = c/2
/// vanishes.
std::vector<double> critical_ratios(const CouplingParams& params, double lo, double hi, double rel_tol = 1e-6);

}  // namespace rydflux
