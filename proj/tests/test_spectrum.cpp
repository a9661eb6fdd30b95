#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rydflux/errors.hpp"
#include "rydflux/spectrum.hpp"

using namespace rydflux;

namespace {

constexpr double kPi = std::numbers::pi;

CellGraph square_lattice(double t) {
  CellGraph g{build_spec(1, 1, 1.0), CouplingMode::nearest_neighbor, {}};
  for (int s : {-1, 1}) {
    g.couplings.push_back({0, 0, s, 0, t});
    g.couplings.push_back({0, 0, 0, s, t});
  }
  return g;
}

// Landau-gauge Harper-Hofstadter model with flux 1/q per plaquette.
CellGraph hofstadter(int q) {
  CellGraph g{build_spec(1, q, 1.0), CouplingMode::nearest_neighbor, {}};
  auto add = [&](int from, int to, int cell, int row, cplx t) {
    g.couplings.push_back({from, to, cell, row, t});
    g.couplings.push_back({to, from, -cell, -row, std::conj(t)});
  };
  for (int m = 0; m < q; ++m) {
    add(m, (m + 1) % q, m + 1 == q ? 1 : 0, 0, -1.0);
    add(m, m, 0, 1, -std::polar(1.0, 2 * kPi * m / q));
  }
  return g;
}

// Two sublattices with opposite on-site energies and real hops.
CellGraph trivial_insulator() {
  CellGraph g{build_spec(1, 2, 1.0), CouplingMode::nearest_neighbor, {}};
  g.couplings.push_back({0, 0, 0, 0, 3.0});
  g.couplings.push_back({1, 1, 0, 0, -3.0});
  for (int s : {-1, 1}) {
    g.couplings.push_back({0, 0, 0, s, 0.5});
    g.couplings.push_back({1, 1, 0, s, 0.5});
  }
  g.couplings.push_back({0, 1, 0, 0, 0.4});
  g.couplings.push_back({1, 0, 0, 0, 0.4});
  g.couplings.push_back({1, 0, 1, 0, 0.4});
  g.couplings.push_back({0, 1, -1, 0, 0.4});
  return g;
}

std::vector<double> sorted(Eigen::VectorXd v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("square lattice dispersion") {
  const CellGraph g = square_lattice(-1.0);
  CHECK(bloch_matrix(g, Vec2(0, 0))(0, 0).real() == doctest::Approx(-4.0));
  const Vec2 k(0.7, -1.9);
  const double e = -2 * (std::cos(k.x()) + std::cos(k.y()));
  CHECK(bloch_matrix(g, k)(0, 0).real() == doctest::Approx(e));
}

TEST_CASE("bloch matrix is hermitian and zone periodic") {
  const LatticeSpec spec = build_spec(7, 4, 0.9);
  const CellGraph g = assemble_cell_graph(spec, CouplingParams{}, CouplingMode::long_range);
  const Vec2 k(0.31, 1.7);
  const Eigen::MatrixXcd h = bloch_matrix(g, k);
  CHECK((h - h.adjoint()).norm() < 1e-13 * h.norm());
  const Vec2 gx(2 * kPi / spec.cell_length(), 0), gy(0, 2 * kPi / spec.a);
  const auto e0 = bands(g, {k}).energies;
  const auto e1 = bands(g, {Vec2(k + gx)}).energies;
  const auto e2 = bands(g, {Vec2(k + gy)}).energies;
  CHECK((e0 - e1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((e0 - e2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("k grid and path") {
  const LatticeSpec spec = build_spec(7, 4, 1.0);
  const auto grid = k_grid(spec, 4, 3);
  REQUIRE(grid.size() == 12);
  CHECK(grid[1].x() == doctest::Approx(2 * kPi / 16));
  CHECK(grid[4].y() == doctest::Approx(2 * kPi / 3));
  const auto path = k_path(spec, 10);
  CHECK(path.size() == 31);
  CHECK(path[10].x() == doctest::Approx(kPi / 4));
  CHECK(path.back().norm() == 0.0);
  CHECK_THROWS_AS(k_grid(spec, 0, 3), ConfigError);
}

TEST_CASE("band energies are sorted") {
  const CellGraph g = hofstadter(3);
  const BandData d = bands_on_grid(g, 8, 8);
  CHECK(d.num_bands() == 3);
  for (Eigen::Index r = 0; r < d.energies.rows(); ++r)
    for (int b = 0; b + 1 < 3; ++b) CHECK(d.energies(r, b) <= d.energies(r, b + 1));
}

TEST_CASE("spectra are gauge invariant") {
  const LatticeSpec spec = build_spec(7, 4, 1.0);
  const CellGraph g = assemble_cell_graph(spec, CouplingParams{}, CouplingMode::nearest_neighbor);
  CellGraph gauged = g;
  const double chi[] = {0.3, -1.2, 2.5, 0.9};
  for (auto& c : gauged.couplings) c.amplitude *= std::polar(1.0, chi[c.to] - chi[c.from]);
  const auto a = bands_on_grid(g, 6, 6).energies;
  const auto b = bands_on_grid(gauged, 6, 6).energies;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("dos of a flat band is one gaussian") {
  CellGraph g{build_spec(1, 1, 1.0), CouplingMode::nearest_neighbor, {{0, 0, 0, 0, 2.5}}};
  const BandData d = bands_on_grid(g, 4, 4);
  const auto curve = dos(d, 0.1, 401);
  const auto peak = std::max_element(curve.begin(), curve.end(),
                                     [](const DosPoint& l, const DosPoint& r) { return l.density < r.density; });
  CHECK(peak->energy == doctest::Approx(2.5).epsilon(1e-3));
  CHECK(peak->density == doctest::Approx(1.0 / (0.1 * std::sqrt(2 * kPi))).epsilon(1e-3));
  CHECK_THROWS_AS(dos(d, 0.0), ConfigError);
  CHECK_THROWS_AS(dos(d, -1.0), ConfigError);
}

TEST_CASE("dos integrates to the number of bands") {
  const CellGraph g = assemble_cell_graph(build_spec(7, 4, 1.0), CouplingParams{}, CouplingMode::nearest_neighbor);
  const BandData d = bands_on_grid(g, 16, 16);
  const auto curve = dos(d, default_broadening(d));
  double integral = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    integral += 0.5 * (curve[i].density + curve[i - 1].density) * (curve[i].energy - curve[i - 1].energy);
  CHECK(integral == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("trivial insulator has zero Chern numbers") {
  const BandTopology t = band_chern(trivial_insulator(), 12);
  REQUIRE(t.groups.size() == 2);
  for (const auto& g : t.groups) CHECK(g.chern == 0);
  CHECK(t.gaps[0] > 0);
}

TEST_CASE("hofstadter Chern numbers") {
  const BandTopology t = band_chern(hofstadter(3), 24);
  REQUIRE(t.groups.size() == 3);
  CHECK(std::abs(t.groups[0].chern) == 1);
  CHECK(t.groups[0].chern == t.groups[2].chern);
  CHECK(t.groups[0].chern + t.groups[1].chern + t.groups[2].chern == 0);
  const BandTopology fine = band_chern(hofstadter(3), 48);
  for (int b = 0; b < 3; ++b) CHECK(fine.groups[b].chern == t.groups[b].chern);
  CHECK(t.chern_of_band(0) == t.groups[0].chern);
  CHECK(t.flatness.size() == 3);
  CHECK(t.gaps.size() == 2);
}

TEST_CASE("touching bands need grouping") {
  CellGraph g{build_spec(1, 2, 1.0), CouplingMode::nearest_neighbor, {}};
  for (int m : {0, 1})
    for (int s : {-1, 1}) {
      g.couplings.push_back({m, m, 0, s, 1.0});
      g.couplings.push_back({m, m, s, 0, 1.0});
    }
  CHECK_THROWS_AS(band_chern(g, 8), NumericalError);
  const BandTopology t = band_chern(g, 8, BandGrouping::merge_touching);
  REQUIRE(t.groups.size() == 1);
  CHECK(t.groups[0].count == 2);
  CHECK(t.groups[0].chern == 0);
}

TEST_CASE("bloch spectrum equals the torus spectrum") {
  const LatticeSpec spec = build_spec(7, 4, 1.0);
  const CouplingParams p;
  for (auto mode : {CouplingMode::nearest_neighbor, CouplingMode::long_range}) {
    const CellGraph cell = assemble_cell_graph(spec, p, mode);
    const FiniteLattice lat = tile(spec, 12, 12);
    const Eigen::MatrixXcd h = hopping_matrix(fold(cell, lat));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    const BandData d = bands_on_grid(cell, lat.num_cells_x(), lat.ly());
    std::vector<double> bloch(d.energies.data(), d.energies.data() + d.energies.size());
    std::sort(bloch.begin(), bloch.end());
    const auto torus = sorted(solver.eigenvalues());
    REQUIRE(bloch.size() == torus.size());
    double worst = 0;
    for (std::size_t i = 0; i < torus.size(); ++i) worst = std::max(worst, std::fabs(bloch[i] - torus[i]));
    CHECK(worst < 1e-10);
  }
}
