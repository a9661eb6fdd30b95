#include "rydflux/berry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rydflux/errors.hpp"
#include "rydflux/fluxmap.hpp"

namespace rydflux {

double LinkField::plaquette(int i, int j) const {
  const int i1 = (i + 1) % nx_;
  const int j1 = (j + 1) % ny_;
  return field_strength(ax(i, j), ay(i1, j), ax(i, j1), ay(i, j));
}

double LinkField::chern() const {
  double sum = 0;
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) sum += plaquette(i, j);
  return chern_from_field(sum);
}

double field_strength(double bottom, double right, double top, double left) {
  return wrap_angle(bottom + right - top - left);
}

double chern_from_field(double total_field) {
  // Link phases are -A.dk for A = i<psi|d psi>, hence the sign.
  return -total_field / (2 * std::numbers::pi);
}

double link_angle(const Eigen::MatrixXcd& lhs, const Eigen::MatrixXcd& rhs) {
  const Eigen::MatrixXcd overlap = lhs.adjoint() * rhs;
  const std::complex<double> d = overlap.rows() == 1 ? overlap(0, 0) : overlap.determinant();
  if (std::abs(d) < 1e-12) throw NumericalError("vanishing overlap between neighboring states; grid too coarse");
  return std::arg(d);
}

int checked_integer(double value, double tol) {
  const double r = std::round(value);
  if (std::fabs(value - r) > tol) {
    std::ostringstream msg;
    msg << "accumulated Berry flux " << value << " is not an integer; grid too coarse";
    throw NumericalError(msg.str());
  }
  return static_cast<int>(r);
}

}  // namespace rydflux
