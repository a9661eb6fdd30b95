#include "rydflux/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rydflux/berry.hpp"
#include "rydflux/errors.hpp"

namespace rydflux {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTouch = 1e-10;

}  // namespace

Eigen::MatrixXcd bloch_matrix(const CellGraph& graph, const Vec2& k) {
  const int q = graph.spec.q;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(q, q);
  for (const auto& c : graph.couplings) {
    const double phase = k.x() * c.cell_shift * graph.spec.cell_length() + k.y() * c.row_shift * graph.spec.a;
    H(c.to, c.from) += c.amplitude * std::polar(1.0, phase);
  }
  return H;
}

std::vector<Vec2> k_grid(const LatticeSpec& spec, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("k grid needs positive dimensions");
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out.emplace_back(kTwoPi * i / (nx * spec.cell_length()), kTwoPi * j / (ny * spec.a));
  return out;
}

std::vector<Vec2> k_path(const LatticeSpec& spec, int points_per_segment) {
  if (points_per_segment < 1) throw ConfigError("k path needs at least one point per segment");
  const Vec2 G(0, 0);
  const Vec2 X(std::numbers::pi / spec.cell_length(), 0);
  const Vec2 M(std::numbers::pi / spec.cell_length(), std::numbers::pi / spec.a);
  const Vec2 corners[4] = {G, X, M, G};
  std::vector<Vec2> out;
  for (int s = 0; s < 3; ++s)
    for (int i = 0; i < points_per_segment; ++i)
      out.push_back(corners[s] + (corners[s + 1] - corners[s]) * (static_cast<double>(i) / points_per_segment));
  out.push_back(G);
  return out;
}

BandData bands(const CellGraph& graph, const std::vector<Vec2>& k) {
  BandData data;
  data.k = k;
  data.energies.resize(static_cast<Eigen::Index>(k.size()), graph.spec.q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  for (std::size_t i = 0; i < k.size(); ++i) {
    solver.compute(bloch_matrix(graph, k[i]), Eigen::EigenvaluesOnly);
    data.energies.row(static_cast<Eigen::Index>(i)) = solver.eigenvalues().transpose();
  }
  return data;
}

BandData bands_on_grid(const CellGraph& graph, int nx, int ny) {
  BandData data = bands(graph, k_grid(graph.spec, nx, ny));
  data.grid_nx = nx;
  data.grid_ny = ny;
  return data;
}

double default_broadening(const BandData& data) {
  return 0.02 * (data.energies.maxCoeff() - data.energies.minCoeff());
}

std::vector<DosPoint> dos(const BandData& data, double broadening, int points) {
  if (!(broadening > 0)) throw ConfigError("DOS broadening must be positive");
  const double lo = data.energies.minCoeff() - 6 * broadening;
  const double hi = data.energies.maxCoeff() + 6 * broadening;
  if (points <= 0) points = std::max(2001, static_cast<int>(std::ceil((hi - lo) / (broadening / 8))) + 1);
  const double norm = 1.0 / (data.energies.rows() * broadening * std::sqrt(kTwoPi));
  std::vector<DosPoint> out(points);
  for (int i = 0; i < points; ++i) {
    const double e = lo + (hi - lo) * i / (points - 1);
    double acc = 0;
    for (Eigen::Index r = 0; r < data.energies.rows(); ++r)
      for (Eigen::Index b = 0; b < data.energies.cols(); ++b) {
        const double x = (e - data.energies(r, b)) / broadening;
        if (std::fabs(x) < 12) acc += std::exp(-0.5 * x * x);
      }
    out[i] = {e, acc * norm};
  }
  return out;
}

std::optional<int> BandTopology::chern_of_band(int n) const {
  for (const auto& g : groups)
    if (g.first == n && g.count == 1) return g.chern;
  return std::nullopt;
}

BandTopology band_chern(const CellGraph& graph, int n, BandGrouping grouping) {
  if (n < 2) throw ConfigError("Chern grid needs at least 2 x 2 points");
  const int q = graph.spec.q;
  const auto ks = k_grid(graph.spec, n, n);

  std::vector<Eigen::MatrixXcd> states(ks.size());
  Eigen::MatrixXd energies(static_cast<Eigen::Index>(ks.size()), q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    solver.compute(bloch_matrix(graph, ks[i]));
    states[i] = solver.eigenvectors();
    energies.row(static_cast<Eigen::Index>(i)) = solver.eigenvalues().transpose();
  }

  // Direct gaps on the grid decide the grouping.
  std::vector<double> direct(std::max(q - 1, 0), std::numeric_limits<double>::infinity());
  for (Eigen::Index r = 0; r < energies.rows(); ++r)
    for (int b = 0; b + 1 < q; ++b) direct[b] = std::min(direct[b], energies(r, b + 1) - energies(r, b));

  BandTopology topo;
  for (int b = 0; b < q; ++b) {
    if (!topo.groups.empty() && direct[b - 1] < kTouch) {
      if (grouping == BandGrouping::strict) {
        std::ostringstream msg;
        msg << "bands " << b - 1 << " and " << b << " touch on the " << n << "x" << n
            << " grid; use a finer grid or group the bands";
        throw NumericalError(msg.str());
      }
      ++topo.groups.back().count;
    } else {
      topo.groups.push_back({b, 1, 0});
    }
  }

  for (auto& g : topo.groups) {
    LinkField links(n, n);
    auto block = [&](int i, int j) { return states[static_cast<std::size_t>(j) * n + i].middleCols(g.first, g.count); };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Eigen::MatrixXcd here = block(i, j);
        links.ax(i, j) = link_angle(here, block((i + 1) % n, j));
        links.ay(i, j) = link_angle(here, block(i, (j + 1) % n));
      }
    g.chern = checked_integer(links.chern());
  }

  for (int b = 0; b < q; ++b) topo.bandwidths.push_back(energies.col(b).maxCoeff() - energies.col(b).minCoeff());
  for (int b = 0; b + 1 < q; ++b) topo.gaps.push_back(energies.col(b + 1).minCoeff() - energies.col(b).maxCoeff());
  for (int b = 0; b < q; ++b) {
    double gap = std::numeric_limits<double>::infinity();
    if (q > 1) gap = b + 1 < q ? topo.gaps[b] : topo.gaps[b - 1];
    topo.flatness.push_back(gap > 0 ? topo.bandwidths[b] / gap : std::numeric_limits<double>::infinity());
  }
  return topo;
}

}  // namespace rydflux
