#include "rydflux/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "rydflux/errors.hpp"

namespace rydflux {

namespace {

double wrap_periodic(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  return r;
}

double periodic_distance(double x, double y, double period) {
  double d = std::fabs(wrap_periodic(x - y, period));
  return std::min(d, period - d);
}

int floor_mod(int v, int m) {
  int r = v % m;
  return r < 0 ? r + m : r;
}

}  // namespace

LatticeSpec build_spec(int p, int q, double a_over_b) {
  if (p < 1 || q < 1) throw ConfigError("p and q must be positive integers");
  if (!(a_over_b > 0)) throw ConfigError("a_over_b must be positive");
  LatticeSpec spec;
  spec.p = p;
  spec.q = q;
  spec.a = a_over_b;
  spec.b = 1.0;
  const double c = spec.c();
  spec.b_offsets.reserve(p);
  for (int s = 0; s < p; ++s) spec.b_offsets.push_back({s * c, 0.0});
  validate_spec(spec);
  if (auto w = regime_warning(spec)) std::clog << "warning: " << *w << '\n';
  return spec;
}

void validate_spec(const LatticeSpec& spec) {
  if (spec.p < 1 || spec.q < 1) throw ConfigError("p and q must be positive integers");
  if (std::gcd(spec.p, spec.q) != 1) {
    std::ostringstream msg;
    msg << "p = " << spec.p << " and q = " << spec.q << " share a common factor";
    throw ConfigError(msg.str());
  }
  if (!(spec.a > 0) || !(spec.b > 0)) throw ConfigError("lattice spacings must be positive");
  if (static_cast<int>(spec.b_offsets.size()) != spec.p) {
    std::ostringstream msg;
    msg << "expected " << spec.p << " ancilla offsets, got " << spec.b_offsets.size();
    throw ConfigError(msg.str());
  }
  for (const auto& o : spec.b_offsets)
    if (!std::isfinite(o.x) || !std::isfinite(o.z)) throw ConfigError("ancilla offsets must be finite");
}

std::optional<std::string> regime_warning(const LatticeSpec& spec) {
  const double r = spec.c_over_a();
  if (r > 0.41 && r < 2.00) return std::nullopt;
  std::ostringstream msg;
  msg << "c/a = " << r << " lies outside (0.41, 2.00); winding number is not 1";
  return msg.str();
}

LatticeSpec reflect(const LatticeSpec& spec) {
  LatticeSpec out = spec;
  const double L = spec.cell_length();
  for (auto& o : out.b_offsets) o.x = wrap_periodic(L - o.x, L);
  return out;
}

LatticeSpec canonicalize(const LatticeSpec& spec) {
  LatticeSpec out = spec;
  const double L = spec.cell_length();
  for (auto& o : out.b_offsets) {
    o.x = wrap_periodic(o.x, L);
    if (L - o.x < kGeomEps) o.x = 0.0;
  }
  std::sort(out.b_offsets.begin(), out.b_offsets.end(), [](const AncillaOffset& l, const AncillaOffset& r) {
    if (std::fabs(l.x - r.x) > kGeomEps) return l.x < r.x;
    return l.z < r.z;
  });
  return out;
}

bool same_geometry(const LatticeSpec& lhs, const LatticeSpec& rhs, double eps) {
  if (lhs.p != rhs.p || lhs.q != rhs.q) return false;
  if (std::fabs(lhs.a - rhs.a) > eps || std::fabs(lhs.b - rhs.b) > eps) return false;
  const auto l = canonicalize(lhs);
  const auto r = canonicalize(rhs);
  const double L = l.cell_length();
  for (std::size_t s = 0; s < l.b_offsets.size(); ++s) {
    if (periodic_distance(l.b_offsets[s].x, r.b_offsets[s].x, L) > eps) return false;
    if (std::fabs(l.b_offsets[s].z - r.b_offsets[s].z) > eps) return false;
  }
  return true;
}

std::vector<int> mirror_partners(const LatticeSpec& spec, double eps) {
  const double L = spec.cell_length();
  const auto& off = spec.b_offsets;
  const int n = static_cast<int>(off.size());
  std::vector<int> partner(n, -1);
  for (int s = 0; s < n; ++s) {
    if (partner[s] >= 0) continue;
    const double target = L - off[s].x;
    for (int t = 0; t < n; ++t) {
      if (partner[t] >= 0) continue;
      if (periodic_distance(off[t].x, target, L) < eps && std::fabs(off[t].z - off[s].z) < eps) {
        partner[s] = t;
        partner[t] = s;
        break;
      }
    }
    if (partner[s] < 0) return {};
  }
  return partner;
}

bool validate_reflection_symmetry(const LatticeSpec& spec, double eps) {
  return !mirror_partners(spec, eps).empty();
}

FiniteLattice::FiniteLattice(LatticeSpec spec, int lx, int ly) : spec_(std::move(spec)), lx_(lx), ly_(ly) {
  validate_spec(spec_);
  if (lx_ < 1 || ly_ < 1) throw ConfigError("lattice extents must be positive");
  if (lx_ % spec_.q != 0) {
    std::ostringstream msg;
    msg << "L_x = " << lx_ << " is not a multiple of q = " << spec_.q;
    throw ConfigError(msg.str());
  }
}

int FiniteLattice::index(int c, int r) const { return floor_mod(r, ly_) * lx_ + floor_mod(c, lx_); }

Vec3 FiniteLattice::position(int site) const { return {col(site) * spec_.b, row(site) * spec_.a, 0.0}; }

Vec3 FiniteLattice::ancilla_position(int ancilla) const {
  const int p = spec_.p;
  const int s = ancilla % p;
  const int cell = (ancilla / p) % num_cells_x();
  const int r = ancilla / (p * num_cells_x());
  const auto& o = spec_.b_offsets[s];
  return {cell * spec_.cell_length() + o.x, r * spec_.a + 0.5 * spec_.a, o.z};
}

Vec3 FiniteLattice::displacement(int i, int j) const {
  Vec3 d = position(j) - position(i);
  const double Lx = lx_ * spec_.b;
  const double Ly = ly_ * spec_.a;
  d.x() -= Lx * std::round(d.x() / Lx);
  d.y() -= Ly * std::round(d.y() / Ly);
  return d;
}

int FiniteLattice::translate(int site, int cells, int rows) const {
  return index(col(site) + cells * spec_.q, row(site) + rows);
}

int FiniteLattice::translate_ancilla(int ancilla, int cells, int rows) const {
  const int p = spec_.p;
  const int s = ancilla % p;
  const int cell = floor_mod(ancilla / p % num_cells_x() + cells, num_cells_x());
  const int r = floor_mod(ancilla / (p * num_cells_x()) + rows, ly_);
  return (r * num_cells_x() + cell) * p + s;
}

FiniteLattice tile(const LatticeSpec& spec, int lx, int ly) { return FiniteLattice(spec, lx, ly); }

}  // namespace rydflux
