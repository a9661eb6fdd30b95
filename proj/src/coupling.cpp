#include "rydflux/coupling.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "rydflux/errors.hpp"

namespace rydflux {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxShells = 20000;

int floor_div(int v, int m) {
  int d = v / m;
  if ((v % m != 0) && ((v < 0) != (m < 0))) --d;
  return d;
}

std::string describe(const Vec3& v) {
  std::ostringstream s;
  s << "(" << v.x() << ", " << v.y() << ", " << v.z() << ")";
  return s.str();
}

// exp(2 i phi_isj) / (|R_is|^3 |R_sj|^3) for one ancilla at s.
cplx path_term(const Vec3& ri, const Vec3& rj, const Vec3& s) {
  const double ax = s.x() - ri.x(), ay = s.y() - ri.y(), az = s.z() - ri.z();
  const double bx = rj.x() - s.x(), by = rj.y() - s.y(), bz = rj.z() - s.z();
  const double pa = ax * ax + ay * ay;
  const double pb = bx * bx + by * by;
  if (pa < 1e-24 || pb < 1e-24) throw NumericalError("ancilla at " + describe(s) + " has no in-plane bond to a hopping site");
  const double da2 = pa + az * az;
  const double db2 = pb + bz * bz;
  // z1 * conj(z2) with z1 = P(R_is), z2 = P(R_sj).
  const cplx u(ax * bx + ay * by, ay * bx - ax * by);
  const double d2 = da2 * db2;
  const double denom = pa * pb * d2 * std::sqrt(d2);
  return u * u / denom;
}

}  // namespace

void CouplingParams::validate() const {
  if (!(w > 0)) throw ConfigError("coupling.w must be positive");
  if (mu == 0 || !std::isfinite(mu)) throw ConfigError("coupling.mu must be nonzero");
  if (!(t_minus >= 0)) throw ConfigError("coupling.t_minus must be non-negative");
  if (!(cutoff_radius > 0)) throw ConfigError("coupling.cutoff_radius must be positive");
  if (!(b_sum_tolerance > 0 && b_sum_tolerance < 1)) throw ConfigError("coupling.b_sum_tolerance must lie in (0, 1)");
}

std::string to_string(CouplingMode mode) {
  return mode == CouplingMode::nearest_neighbor ? "nearest_neighbor" : "long_range";
}

CouplingMode parse_coupling_mode(const std::string& name) {
  if (name == "nearest_neighbor") return CouplingMode::nearest_neighbor;
  if (name == "long_range") return CouplingMode::long_range;
  throw ConfigError("unknown coupling mode '" + name + "'");
}

AncillaLattice AncillaLattice::from_spec(const LatticeSpec& spec) {
  AncillaLattice out;
  out.period_x = spec.cell_length();
  out.period_y = spec.a;
  for (const auto& o : spec.b_offsets) out.basis.emplace_back(o.x, 0.5 * spec.a, o.z);
  return out;
}

AncillaLattice AncillaLattice::rectangular(double c, double a) {
  AncillaLattice out;
  out.period_x = c;
  out.period_y = a;
  out.basis.emplace_back(0.0, 0.5 * a, 0.0);
  return out;
}

double second_order_phase(const Vec3& R_is, const Vec3& R_sj, const Vec3& R_ij) {
  const Eigen::Vector2d u = R_is.head<2>();
  const Eigen::Vector2d v = R_sj.head<2>();
  if (u.squaredNorm() < 1e-24 || v.squaredNorm() < 1e-24)
    throw NumericalError("degenerate in-plane projection for ancilla bond " + describe(R_is));
  const double angle = std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
  const double cross = R_ij.x() * R_is.y() - R_ij.y() * R_is.x();
  return cross < 0 ? -angle : angle;
}

cplx hop_amplitude(const Vec3& ri, const Vec3& rj, std::span<const Vec3> ancillas, const CouplingParams& params) {
  cplx sum{0.0, 0.0};
  for (const auto& s : ancillas) sum += path_term(ri, rj, s);
  cplx t = -params.prefactor() * sum;
  if (params.t_minus != 0) t -= params.t_minus / std::pow((rj - ri).norm(), 3);
  return t;
}

cplx hop_amplitude(const Vec3& ri, const Vec3& rj, const AncillaLattice& ancillas, const CouplingParams& params) {
  const double cx = 0.5 * (ri.x() + rj.x());
  const double cy = 0.5 * (ri.y() + rj.y());
  const double Px = ancillas.period_x;
  const double Py = ancillas.period_y;
  const double delta = std::min(Px, Py);

  auto ring_of = [delta](double dx, double dy) {
    const double m = std::max(std::fabs(dx), std::fabs(dy));
    return std::max(1, static_cast<int>(std::ceil(m / delta)));
  };

  cplx total{0.0, 0.0};
  double magnitude = 0.0;
  int k = 1;
  for (;; ++k) {
    const double R = k * delta;
    cplx ring{0.0, 0.0};
    for (const auto& b : ancillas.basis) {
      const int r_lo = static_cast<int>(std::floor((cy - R - b.y()) / Py)) - 1;
      const int r_hi = static_cast<int>(std::ceil((cy + R - b.y()) / Py)) + 1;
      const int m_lo = static_cast<int>(std::floor((cx - R - b.x()) / Px)) - 1;
      const int m_hi = static_cast<int>(std::ceil((cx + R - b.x()) / Px)) + 1;
      for (int r = r_lo; r <= r_hi; ++r) {
        const double y = b.y() + r * Py;
        const double dy = y - cy;
        if (std::fabs(dy) > R + delta) continue;
        // Rows inside the previous ring only contribute near |dx| = R. Uses
        // ring_of itself so rounding cannot drop a row's middle.
        const bool inner_row = ring_of(0.0, dy) < k;
        auto visit = [&](int m) {
          const double x = b.x() + m * Px;
          if (ring_of(x - cx, dy) != k) return;
          const cplx term = path_term(ri, rj, Vec3(x, y, b.z()));
          ring += term;
          magnitude += std::abs(term);
        };
        if (!inner_row) {
          for (int m = m_lo; m <= m_hi; ++m) visit(m);
        } else {
          const int left_hi = static_cast<int>(std::ceil((cx - (R - delta) - b.x()) / Px)) + 1;
          const int right_lo = static_cast<int>(std::floor((cx + (R - delta) - b.x()) / Px)) - 1;
          if (left_hi >= right_lo) {
            for (int m = m_lo; m <= m_hi; ++m) visit(m);
          } else {
            for (int m = m_lo; m <= left_hi; ++m) visit(m);
            for (int m = right_lo; m <= m_hi; ++m) visit(m);
          }
        }
      }
    }
    total += ring;
    if (k >= 2) {
      const double scale = std::max(std::abs(total), 1e-6 * magnitude);
      if (std::abs(ring) <= params.b_sum_tolerance * scale) break;
    }
    if (k == kMaxShells) throw NumericalError("ancilla sum did not converge");
  }
  // Shells decay like k^-5, so the dropped tail is ~k/4 times the last shell.
  // Far paths tend to +1/r^6; integrate that outside the square of half-width L.
  const double L = k * delta;
  const double density = static_cast<double>(ancillas.basis.size()) / (Px * Py);
  total += density * (3 * std::numbers::pi / 16 + 0.5) / (L * L * L * L);
  cplx t = -params.prefactor() * total;
  if (params.t_minus != 0) t -= params.t_minus / std::pow((rj - ri).norm(), 3);
  return t;
}

CellGraph assemble_cell_graph(const LatticeSpec& spec, const CouplingParams& params, CouplingMode mode) {
  validate_spec(spec);
  params.validate();
  const AncillaLattice ancillas = AncillaLattice::from_spec(spec);
  const int q = spec.q;

  std::vector<std::pair<int, int>> forward;  // (dcol, drow) with drow > 0 or (drow == 0 and dcol > 0)
  if (mode == CouplingMode::nearest_neighbor) {
    forward = {{1, 0}, {0, 1}};
  } else {
    const double rc = params.cutoff_radius;
    const int max_col = static_cast<int>(std::floor(rc / spec.b + 1e-12));
    const int max_row = static_cast<int>(std::floor(rc / spec.a + 1e-12));
    for (int drow = 0; drow <= max_row; ++drow) {
      for (int dcol = -max_col; dcol <= max_col; ++dcol) {
        if (drow == 0 && dcol <= 0) continue;
        const double dist = std::hypot(dcol * spec.b, drow * spec.a);
        if (dist <= rc * (1 + 1e-12)) forward.emplace_back(dcol, drow);
      }
    }
    if (forward.empty()) throw ConfigError("cutoff_radius is below the smallest site spacing; coupling graph is empty");
  }

  CellGraph graph{spec, mode, {}};
  for (int from = 0; from < q; ++from) {
    for (const auto& [dcol, drow] : forward) {
      const Vec3 ri(from * spec.b, 0.0, 0.0);
      const Vec3 rj((from + dcol) * spec.b, drow * spec.a, 0.0);
      const cplx t = hop_amplitude(ri, rj, ancillas, params);
      const int target = from + dcol;
      const int to = ((target % q) + q) % q;
      const int shift = floor_div(target, q);
      graph.couplings.push_back({from, to, shift, drow, t});
      graph.couplings.push_back({to, from, -shift, -drow, std::conj(t)});
    }
  }
  return graph;
}

CouplingGraph fold(const CellGraph& cell, const FiniteLattice& lattice) {
  const int q = cell.spec.q;
  CouplingGraph graph{lattice, cell.mode, {}};
  for (const auto& cc : cell.couplings) {
    const int dcol = cc.dcol(q);
    const int drow = cc.row_shift;
    if (!(drow > 0 || (drow == 0 && dcol > 0))) continue;
    for (int row = 0; row < lattice.ly(); ++row) {
      for (int cx = 0; cx < lattice.num_cells_x(); ++cx) {
        const int col = cx * q + cc.from;
        const int i = lattice.index(col, row);
        const int j = lattice.index(col + dcol, row + drow);
        if (i == j) {
          std::ostringstream msg;
          msg << "torus " << lattice.lx() << "x" << lattice.ly() << " is too small: bond (" << dcol << ", " << drow
              << ") maps a site onto itself";
          throw ConfigError(msg.str());
        }
        graph.couplings.push_back({i, j, dcol, drow, cc.amplitude});
      }
    }
  }
  return graph;
}

CouplingGraph assemble_graph(const FiniteLattice& lattice, const CouplingParams& params, CouplingMode mode) {
  return fold(assemble_cell_graph(lattice.spec(), params, mode), lattice);
}

std::optional<cplx> directed_amplitude(const CouplingGraph& graph, int site, int dcol, int drow) {
  for (const auto& c : graph.couplings) {
    if (c.i == site && c.dcol == dcol && c.drow == drow) return c.amplitude;
    if (c.j == site && c.dcol == -dcol && c.drow == -drow) return std::conj(c.amplitude);
  }
  return std::nullopt;
}

Eigen::MatrixXcd hopping_matrix(const CouplingGraph& graph, double theta_x, double theta_y) {
  const auto& lat = graph.lattice;
  const int n = lat.num_sites();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& c : graph.couplings) {
    const int wx = floor_div(lat.col(c.i) + c.dcol, lat.lx());
    const int wy = floor_div(lat.row(c.i) + c.drow, lat.ly());
    cplx t = c.amplitude;
    if (wx != 0 || wy != 0) t *= std::polar(1.0, theta_x * wx + theta_y * wy);
    h(c.j, c.i) += t;
    h(c.i, c.j) += std::conj(t);
  }
  return h;
}

void write_edge_list(std::ostream& out, const CouplingGraph& graph) {
  out << std::setprecision(17);
  for (const auto& c : graph.couplings)
    out << c.i << ' ' << c.j << ' ' << c.amplitude.real() << ' ' << c.amplitude.imag() << '\n';
}

std::vector<Coupling> read_edge_list(std::istream& in) {
  std::vector<Coupling> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    Coupling c;
    double re = 0, im = 0;
    if (!(s >> c.i >> c.j >> re >> im)) throw ConfigError("malformed edge list line " + std::to_string(lineno));
    c.amplitude = {re, im};
    out.push_back(c);
  }
  return out;
}

cplx vertical_hop(double x, double a, const AncillaLattice& ancillas, const CouplingParams& params) {
  return hop_amplitude(Vec3(x, 0.0, 0.0), Vec3(x, a, 0.0), ancillas, params);
}

WindingProfile winding_profile(double c_over_a, const CouplingParams& params, int samples) {
  if (samples < 64) throw ConfigError("winding profile needs at least 64 samples");
  if (!(c_over_a > 0)) throw ConfigError("c/a must be positive");
  params.validate();
  const double a = 1.0;
  const double c = c_over_a * a;
  const auto ancillas = AncillaLattice::rectangular(c, a);
  const double floor_amp = 1e-12 * params.prefactor() / std::pow(a, 6);

  WindingProfile prof;
  prof.c_over_a = c_over_a;
  prof.x.reserve(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    const double x = c * k / samples;
    // Mirror image of sample samples - k: t(c - x) = conj(t(x)).
    const cplx t = 2 * k > samples ? std::conj(prof.t[samples - k]) : vertical_hop(x, a, ancillas, params);
    if (std::abs(t) < floor_amp) {
      std::ostringstream msg;
      msg << "vanishing hopping at x = " << x << " for c/a = " << c_over_a << ", winding undefined";
      throw NumericalError(msg.str());
    }
    prof.x.push_back(x);
    prof.t.push_back(t);
  }
  prof.phase_unwrapped.resize(prof.t.size());
  prof.phase_unwrapped[0] = std::arg(prof.t[0]);
  for (std::size_t k = 1; k < prof.t.size(); ++k) {
    const double step = std::arg(prof.t[k] / prof.t[k - 1]);
    prof.phase_unwrapped[k] = prof.phase_unwrapped[k - 1] + step;
  }
  prof.n = static_cast<int>(std::lround((prof.phase_unwrapped.back() - prof.phase_unwrapped.front()) / kTwoPi));
  return prof;
}

std::vector<double> critical_ratios(const CouplingParams& params, double lo, double hi, double rel_tol) {
  if (!(lo > 0 && hi > lo)) throw ConfigError("critical-ratio bracket must satisfy 0 < lo < hi");
  params.validate();
  // At the mirror point x = c/2 the hop is real, so its real part changes
  // sign where the winding number jumps.
  auto f = [&](double r) {
    const auto ancillas = AncillaLattice::rectangular(r, 1.0);
    return vertical_hop(0.5 * r, 1.0, ancillas, params).real();
  };
  constexpr int kScan = 64;
  std::vector<double> roots;
  double x0 = lo;
  double f0 = f(x0);
  for (int k = 1; k <= kScan; ++k) {
    const double x1 = lo + (hi - lo) * k / kScan;
    const double f1 = f(x1);
    if (f0 == 0) {
      roots.push_back(x0);
    } else if ((f0 < 0) != (f1 < 0) && f1 != 0) {
      std::uintmax_t iters = 200;
      auto tol = [rel_tol](double l, double u) { return std::fabs(u - l) <= rel_tol * std::min(std::fabs(l), std::fabs(u)); };
      const auto [l, u] = boost::math::tools::toms748_solve(f, x0, x1, f0, f1, tol, iters);
      roots.push_back(0.5 * (l + u));
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0) roots.push_back(x0);
  return roots;
}

}  // namespace rydflux
