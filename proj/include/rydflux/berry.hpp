#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rydflux {

/// U(1) link angles on a periodic nx x ny grid of states.
/// ax(i, j) = arg det(Psi(i, j)^H Psi(i+1, j)), ay likewise along the second axis.
class LinkField {
 public:
  LinkField(int nx, int ny) : nx_(nx), ny_(ny), ax_(nx * ny, 0.0), ay_(nx * ny, 0.0) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double& ax(int i, int j) { return ax_[j * nx_ + i]; }
  double& ay(int i, int j) { return ay_[j * nx_ + i]; }
  double ax(int i, int j) const { return ax_[j * nx_ + i]; }
  double ay(int i, int j) const { return ay_[j * nx_ + i]; }

  /// Field strength of plaquette (i, j), wrapped to (-pi, pi].
  double plaquette(int i, int j) const;

  /// (1/2pi) * sum of the curvature of the Berry connection A = i<psi|d psi>
  /// over all plaquettes. Integer up to rounding.
  double chern() const;

 private:
  int nx_;
  int ny_;
  std::vector<double> ax_;
  std::vector<double> ay_;
};

/// Wrapped field strength of one plaquette from its four link angles.
double field_strength(double bottom, double right, double top, double left);

/// Chern number (not yet rounded) from the summed field strengths.
double chern_from_field(double total_field);

/// arg det(lhs^H rhs) for column-orthonormal blocks of states.
double link_angle(const Eigen::MatrixXcd& lhs, const Eigen::MatrixXcd& rhs);

/// Rounds a Chern sum, throwing NumericalError if it is further than `tol`
/// from an integer.
int checked_integer(double value, double tol = 1e-6);

}  // namespace rydflux
