#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <tuple>

#include "fixtures.hpp"
#include "rydflux/berry.hpp"
#include "rydflux/fluxmap.hpp"
#include "rydflux/manybody.hpp"
#include "rydflux/optimizer.hpp"
#include "rydflux/spectrum.hpp"

using namespace rydflux;

namespace {

constexpr double kPi = std::numbers::pi;

CouplingGraph torus(int lx, int ly, CouplingMode mode = CouplingMode::nearest_neighbor, double cutoff = 5.0) {
  CouplingParams p;
  p.cutoff_radius = cutoff;
  return assemble_graph(tile(fixtures::optimized_spec(), lx, ly), p, mode);
}

// Smallest tori here on which no 5 b bond wraps onto itself.
CouplingGraph sample_torus(CouplingMode mode) {
  return mode == CouplingMode::long_range ? torus(12, 12, mode) : torus(8, 4, mode);
}

CouplingGraph gauged(const CouplingGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::vector<double> chi(g.lattice.num_sites());
  for (double& c : chi) c = angle(rng);
  CouplingGraph out = g;
  for (auto& c : out.couplings) c.amplitude *= std::polar(1.0, chi[c.j] - chi[c.i]);
  return out;
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd& h) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

double max_rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_SUITE("hermiticity") {
  TEST_CASE("reversed hops are conjugate") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const auto anc = AncillaLattice::from_spec(fixtures::optimized_spec());
    const CouplingParams p;
    for (int k = 0; k < 20; ++k) {
      const Vec3 ri(u(rng), 0.0, 0.0), rj(u(rng), std::round(u(rng)) * fixtures::optimized_spec().a, 0.0);
      if ((ri - rj).norm() < 0.5) continue;
      const cplx f = hop_amplitude(ri, rj, anc, p);
      const cplx b = hop_amplitude(rj, ri, anc, p);
      CHECK(std::abs(f - std::conj(b)) < 1e-14 * std::abs(f));
    }
  }

  TEST_CASE("torus and bloch matrices") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
    for (auto mode : {CouplingMode::nearest_neighbor, CouplingMode::long_range}) {
      const CouplingGraph g = sample_torus(mode);
      for (int k = 0; k < 5; ++k) {
        const Eigen::MatrixXcd h = hopping_matrix(g, angle(rng), angle(rng));
        CHECK((h - h.adjoint()).norm() < 1e-13 * h.norm());
      }
      const CellGraph cell = assemble_cell_graph(fixtures::optimized_spec(), CouplingParams{}, mode);
      for (int k = 0; k < 5; ++k) {
        const Eigen::MatrixXcd h = bloch_matrix(cell, Vec2(angle(rng), angle(rng)));
        CHECK((h - h.adjoint()).norm() < 1e-13 * h.norm());
      }
    }
  }

  TEST_CASE("many-body operator") {
    const CouplingGraph g = torus(4, 4);
    const Sector s(16, 3);
    const ManyBodyHamiltonian h(s, g, {0.4, 2.1});
    const Eigen::MatrixXcd m = h.dense();
    CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-13 * h.max_abs_hop());
  }

  TEST_CASE("horizontal bonds of symmetric cells are real") {
    std::mt19937_64 rng(3);
    const LatticeSpec base = build_spec(7, 4, 1.0);
    for (int k = 0; k < 10; ++k) {
      const LatticeSpec s = fixtures::perturbed(base, 0.2 * base.c(), 0.2 * base.a, rng);
      for (const cplx& t : cell_bonds(s, CouplingParams{}).horizontal) CHECK(std::fabs(t.imag()) < 1e-10 * std::abs(t));
    }
  }
}

TEST_SUITE("gauge invariance") {
  TEST_CASE("plaquette fluxes") {
    std::mt19937_64 rng(4);
    const CouplingGraph g = torus(8, 4);
    const FluxField a = plaquette_fluxes(g), b = plaquette_fluxes(gauged(g, rng));
    for (std::size_t k = 0; k < a.plaquette_fluxes.size(); ++k)
      CHECK(std::fabs(wrap_angle(a.plaquette_fluxes[k] - b.plaquette_fluxes[k])) < 1e-12);
  }

  TEST_CASE("single-particle spectra") {
    std::mt19937_64 rng(5);
    for (auto mode : {CouplingMode::nearest_neighbor, CouplingMode::long_range}) {
      const CouplingGraph g = sample_torus(mode);
      const CouplingGraph h = gauged(g, rng);
      CHECK(max_rel_diff(eigenvalues(hopping_matrix(g, 0.3, 1.7)), eigenvalues(hopping_matrix(h, 0.3, 1.7))) < 1e-12);
    }
  }

  TEST_CASE("many-body spectra") {
    std::mt19937_64 rng(6);
    const CouplingGraph g = torus(4, 4);
    const CouplingGraph h = gauged(g, rng);
    const Sector s(16, 2);
    const Twist tw{1.1, 0.2};
    const EigenPairs a = dense_lowest(ManyBodyHamiltonian(s, g, tw).dense(), 120);
    const EigenPairs b = dense_lowest(ManyBodyHamiltonian(s, h, tw).dense(), 120);
    CHECK(max_rel_diff(a.values, b.values) < 1e-12);
  }
}

TEST_SUITE("twist periodicity") {
  TEST_CASE("single particle") {
    const CouplingGraph g = sample_torus(CouplingMode::long_range);
    const Eigen::MatrixXcd h0 = hopping_matrix(g, 0.7, 2.3);
    CHECK((hopping_matrix(g, 0.7 + 2 * kPi, 2.3) - h0).norm() < 1e-12 * h0.norm());
    CHECK((hopping_matrix(g, 0.7, 2.3 + 2 * kPi) - h0).norm() < 1e-12 * h0.norm());
  }

  TEST_CASE("many body") {
    const CouplingGraph g = torus(4, 4);
    const Sector s(16, 2);
    EDOptions opts;
    opts.lanczos.nev = 4;
    const EDResult a = lowest_eigs(ManyBodyHamiltonian(s, g, {0.9, 0.4}), opts);
    const EDResult b = lowest_eigs(ManyBodyHamiltonian(s, g, {0.9 + 2 * kPi, 0.4}), opts);
    const EDResult c = lowest_eigs(ManyBodyHamiltonian(s, g, {0.9, 0.4 + 2 * kPi}), opts);
    CHECK(max_rel_diff(a.eigenvalues, b.eigenvalues) < 1e-10);
    CHECK(max_rel_diff(a.eigenvalues, c.eigenvalues) < 1e-10);
  }

  TEST_CASE("bloch matrix under reciprocal shifts") {
    const LatticeSpec spec = fixtures::optimized_spec();
    const CellGraph cell = assemble_cell_graph(spec, CouplingParams{}, CouplingMode::long_range);
    const Vec2 k(0.3, 1.1);
    const Vec2 gx(2 * kPi / (spec.q * spec.b), 0.0), gy(0.0, 2 * kPi / spec.a);
    const Eigen::VectorXd e = eigenvalues(bloch_matrix(cell, k));
    CHECK(max_rel_diff(e, eigenvalues(bloch_matrix(cell, k + gx))) < 1e-12);
    CHECK(max_rel_diff(e, eigenvalues(bloch_matrix(cell, k + gy))) < 1e-12);
  }

  TEST_CASE("ground energy varies smoothly along a twist scan") {
    const CouplingGraph g = torus(4, 4);
    const Sector s(16, 2);
    const auto scan = twist_scan(s, g, TwistAxis::x, kPi, 21, EDOptions{});
    const double w = energy_scale(g);
    for (std::size_t k = 1; k < scan.size(); ++k)
      CHECK(std::fabs(scan[k].eigenvalues[0] - scan[k - 1].eigenvalues[0]) < 0.05 * w);
  }
}

TEST_SUITE("chern grid independence") {
  TEST_CASE("lowest band") {
    const CellGraph cell = assemble_cell_graph(fixtures::optimized_spec(), CouplingParams{}, CouplingMode::nearest_neighbor);
    const BandTopology a = band_chern(cell, 11, BandGrouping::merge_touching);
    const BandTopology b = band_chern(cell, 13, BandGrouping::merge_touching);
    const BandTopology c = band_chern(cell, 48, BandGrouping::merge_touching);
    REQUIRE(a.chern_of_band(0).has_value());
    CHECK(a.chern_of_band(0) == b.chern_of_band(0));
    CHECK(a.chern_of_band(0) == c.chern_of_band(0));
    int total = 0;
    for (const auto& grp : c.groups) total += grp.chern;
    CHECK(total == 0);
  }

  TEST_CASE("many-body ground manifold") {
    const CouplingGraph g = torus(4, 4);
    const Sector s(16, 2);
    EDOptions opts;
    opts.lanczos.nev = 4;
    const ChernResult a = many_body_chern(s, g, 11, 2, opts);
    const ChernResult b = many_body_chern(s, g, 13, 2, opts);
    CHECK(a.chern == b.chern);
  }

  TEST_CASE("abelian berry flux of a gapped state is an integer") {
    for (auto [lx, ly, n] : {std::tuple{4, 2, 2}, std::tuple{8, 2, 4}}) {
      const Sector s(lx * ly, n);
      const CouplingGraph g = torus(lx, ly);
      const ChernResult a = many_body_chern(s, g, 7, 1, EDOptions{});
      const ChernResult b = many_body_chern(s, g, 11, 1, EDOptions{});
      CHECK(std::fabs(a.raw_chern - std::round(a.raw_chern)) < 1e-9);
      CHECK(a.chern == b.chern);
    }
  }
}

TEST_SUITE("oracle equivalence") {
  TEST_CASE("lanczos matches dense diagonalization up to dim 2000") {
    struct Case {
      int lx, ly, n;
      CouplingMode mode;
    };
    // Long-range cases use a 1.5 b cutoff so no bond wraps onto itself.
    const Case cases[] = {{4, 4, 1, CouplingMode::nearest_neighbor}, {4, 4, 2, CouplingMode::nearest_neighbor},
                          {4, 4, 3, CouplingMode::long_range},       {4, 3, 6, CouplingMode::nearest_neighbor},
                          {8, 2, 4, CouplingMode::nearest_neighbor}, {8, 2, 4, CouplingMode::long_range}};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
    for (const Case& c : cases) {
      CAPTURE(c.lx);
      CAPTURE(c.ly);
      CAPTURE(c.n);
      const CouplingGraph g = torus(c.lx, c.ly, c.mode, 1.5);
      const Sector s(c.lx * c.ly, c.n);
      REQUIRE(s.dim() <= 2000);
      const ManyBodyHamiltonian h(s, g, {angle(rng), angle(rng)});
      const EDResult it = lowest_eigs(h, EDOptions{});
      const Eigen::MatrixXcd m = h.dense();
      const EigenPairs ref = dense_lowest(m, static_cast<int>(it.eigenvalues.size()));
      const double norm = m.norm();
      for (Eigen::Index k = 0; k < it.eigenvalues.size(); ++k) {
        CHECK(std::fabs(it.eigenvalues[k] - ref.values[k]) <= 1e-9 * std::max(1.0, std::fabs(ref.values[k])));
        CHECK(it.residuals[k] < 1e-9 * norm);
      }
    }
  }

  TEST_CASE("bloch spectra equal torus spectra") {
    const LatticeSpec spec = fixtures::optimized_spec();
    const std::vector<std::pair<int, int>> nn_sizes{{4, 4}, {8, 6}, {12, 3}}, lr_sizes{{12, 12}, {16, 12}};
    for (auto mode : {CouplingMode::nearest_neighbor, CouplingMode::long_range}) {
      const CellGraph cell = assemble_cell_graph(spec, CouplingParams{}, mode);
      for (const auto& [lx, ly] : mode == CouplingMode::long_range ? lr_sizes : nn_sizes) {
        const int sz[] = {lx, ly};
        const CouplingGraph g = assemble_graph(tile(spec, sz[0], sz[1]), CouplingParams{}, mode);
        const Eigen::VectorXd real_space = eigenvalues(hopping_matrix(g));
        const BandData bd = bands_on_grid(cell, sz[0] / spec.q, sz[1]);
        std::vector<double> bloch(bd.energies.data(), bd.energies.data() + bd.energies.size());
        std::sort(bloch.begin(), bloch.end());
        REQUIRE(bloch.size() == static_cast<std::size_t>(real_space.size()));
        double worst = 0;
        for (std::size_t k = 0; k < bloch.size(); ++k) worst = std::max(worst, std::fabs(bloch[k] - real_space[k]));
        CHECK(worst < 1e-10 * real_space.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_SUITE("flux bookkeeping") {
  TEST_CASE("plaquette fluxes of a cell sum to zero mod 2pi") {
    std::mt19937_64 rng(8);
    const LatticeSpec base = build_spec(7, 4, 1.0);
    for (int k = 0; k < 10; ++k) {
      const LatticeSpec s = fixtures::perturbed(base, 0.2 * base.c(), 0.2 * base.a, rng);
      double sum = 0;
      for (double f : cell_bonds(s, CouplingParams{}).fluxes) sum += f;
      CHECK(std::fabs(wrap_angle(sum)) < 1e-10);
    }
  }

  TEST_CASE("winding profile is antisymmetric about mirror points") {
    for (double ratio : {0.5, 4.0 / 7.0, 1.0, 2.5}) {
      const WindingProfile w = winding_profile(ratio, CouplingParams{}, 512);
      const auto& phi = w.phase_unwrapped;
      const int n = static_cast<int>(phi.size()) - 1;
      REQUIRE(n % 2 == 0);
      // The hop is real at x = 0, c/2 and c; about each of them the phase is
      // odd, and by periodicity all three reduce to one relation.
      for (int k = 0; k <= n; ++k) CHECK(std::fabs(phi[k] + phi[n - k] - phi[0] - phi[n]) < 1e-9);
      for (int k : {0, n / 2, n}) CHECK(std::fabs(std::sin(phi[k])) < 1e-9);
      CHECK(phi[n] - phi[0] == doctest::Approx(2 * kPi * w.n).epsilon(1e-12));
      CHECK(std::abs(w.t.back() - w.t.front()) < 1e-10 * std::abs(w.t.front()));
    }
  }

  TEST_CASE("tighter ancilla sums move amplitudes within tolerance") {
    CouplingParams loose, tight;
    tight.b_sum_tolerance = 1e-13;
    const LatticeSpec spec = fixtures::optimized_spec();
    const CellBonds a = cell_bonds(spec, loose), b = cell_bonds(spec, tight);
    for (int m = 0; m < spec.q; ++m) {
      CHECK(std::abs(a.vertical[m] - b.vertical[m]) < 10 * loose.b_sum_tolerance * std::abs(b.vertical[m]));
      CHECK(std::abs(a.horizontal[m] - b.horizontal[m]) < 10 * loose.b_sum_tolerance * std::abs(b.horizontal[m]));
    }
  }

  TEST_CASE("flux quanta are conserved along the optimization path") {
    const LatticeSpec from = build_spec(7, 4, 1.0), to = fixtures::optimized_spec();
    for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) CHECK(total_flux_quanta(blend(from, to, lambda), CouplingParams{}) == 7);
  }
}

TEST_SUITE("sector") {
  TEST_CASE("rank inverts the basis") {
    for (auto [sites, n] : {std::pair{16, 2}, std::pair{12, 6}, std::pair{20, 3}}) {
      const Sector s(sites, n);
      CHECK(s.dim() == Sector::binomial(sites, n));
      for (std::size_t k = 0; k < s.dim(); ++k) CHECK(s.rank(s.state(k)) == k);
    }
  }
}
