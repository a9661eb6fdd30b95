#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace rydflux {

using Vec3 = Eigen::Vector3d;

// All lengths are in units of the lattice-A horizontal spacing b.
inline constexpr double kGeomEps = 1e-9;

/// In-cell displacement of one ancilla (lattice-B) site. The y coordinate is
/// not stored: every ancilla row sits at +a/2 above a lattice-A row.
struct AncillaOffset {
  double x = 0.0;
  double z = 0.0;
};

/// Two-lattice geometry and its magnetic unit cell.
///
/// The cell holds q lattice-A sites at x = 0, b, ..., (q-1)b on one row and
/// p ancillas between that row and the next; it repeats under q*b along x and
/// a along y.
struct LatticeSpec {
  int p = 1;
  int q = 1;
  double a = 1.0;
  double b = 1.0;
  std::vector<AncillaOffset> b_offsets;

  double c() const { return static_cast<double>(q) * b / p; }
  double cell_length() const { return q * b; }
  double c_over_a() const { return c() / a; }
};

LatticeSpec build_spec(int p, int q, double a_over_b);

/// Checks coprimality, positive spacings and the offset count. Throws
/// ConfigError.
void validate_spec(const LatticeSpec& spec);

/// Warning text when c/a lies outside the single-winding regime (0.41, 2.00).
std::optional<std::string> regime_warning(const LatticeSpec& spec);

/// Mirror image of the cell under x -> q*b - x.
LatticeSpec reflect(const LatticeSpec& spec);

/// Offsets wrapped into [0, q*b) and sorted by (x, z).
LatticeSpec canonicalize(const LatticeSpec& spec);

bool same_geometry(const LatticeSpec& lhs, const LatticeSpec& rhs, double eps = kGeomEps);

bool validate_reflection_symmetry(const LatticeSpec& spec, double eps = kGeomEps);

/// For each ancilla, the index of its mirror partner (itself when on a mirror
/// line). Empty if the cell is not reflection symmetric.
std::vector<int> mirror_partners(const LatticeSpec& spec, double eps = kGeomEps);

/// Lattice-A torus of lx x ly sites tiled from whole magnetic unit cells.
/// Site index = row * lx + col (column fastest).
class FiniteLattice {
 public:
  FiniteLattice(LatticeSpec spec, int lx, int ly);

  const LatticeSpec& spec() const { return spec_; }
  int lx() const { return lx_; }
  int ly() const { return ly_; }
  int num_sites() const { return lx_ * ly_; }
  int num_cells_x() const { return lx_ / spec_.q; }
  int num_ancillas() const { return num_cells_x() * spec_.p * ly_; }

  int index(int col, int row) const;
  int col(int site) const { return site % lx_; }
  int row(int site) const { return site / lx_; }
  Vec3 position(int site) const;
  Vec3 ancilla_position(int ancilla) const;

  /// Minimum-image displacement from site i to site j.
  Vec3 displacement(int i, int j) const;

  /// Site reached from `site` after translating by `cells` magnetic cells
  /// along x and `rows` rows along y.
  int translate(int site, int cells, int rows) const;
  int translate_ancilla(int ancilla, int cells, int rows) const;

 private:
  LatticeSpec spec_;
  int lx_;
  int ly_;
};

FiniteLattice tile(const LatticeSpec& spec, int lx, int ly);

}  // namespace rydflux
