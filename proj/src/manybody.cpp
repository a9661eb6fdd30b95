#include "rydflux/manybody.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "rydflux/berry.hpp"
#include "rydflux/fluxmap.hpp"

namespace rydflux {

namespace {

constexpr int kMaxSites = 64;

struct BinomialTable {
  std::uint64_t c[kMaxSites + 1][kMaxSites + 1] = {};
  BinomialTable() {
    for (int n = 0; n <= kMaxSites; ++n) {
      c[n][0] = 1;
      for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
    }
  }
};

const BinomialTable& binomials() {
  static const BinomialTable table;
  return table;
}

std::uint64_t next_combination(std::uint64_t v) {
  const std::uint64_t t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
}

}  // namespace

std::uint64_t Sector::binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  return binomials().c[n][k];
}

double Sector::estimate_bytes(std::uint64_t dim, int vectors) {
  return static_cast<double>(dim) * (sizeof(std::uint64_t) + vectors * sizeof(cplx));
}

Sector::Sector(int num_sites, int n_particles, double memory_budget, int vectors)
    : num_sites_(num_sites), n_particles_(n_particles) {
  if (num_sites < 1 || num_sites > kMaxSites) throw ConfigError("sector supports 1 to 64 sites");
  if (n_particles < 0 || n_particles > num_sites) throw ConfigError("particle number outside [0, sites]");
  const std::uint64_t d = binomial(num_sites, n_particles);
  const double need = estimate_bytes(d, vectors);
  if (need > memory_budget) {
    std::ostringstream msg;
    msg << "sector dimension " << d << " needs about " << need / 1e9 << " GB, budget is " << memory_budget / 1e9
        << " GB";
    throw CapacityError(msg.str());
  }
  basis_.reserve(d);
  if (n_particles == 0) {
    basis_.push_back(0);
    return;
  }
  std::uint64_t s = (n_particles == 64) ? ~0ULL : ((1ULL << n_particles) - 1);
  for (std::uint64_t i = 0; i < d; ++i) {
    basis_.push_back(s);
    if (i + 1 < d) s = next_combination(s);
  }
}

std::size_t Sector::rank(std::uint64_t state) const {
  const auto& c = binomials().c;
  std::uint64_t r = 0;
  int k = 0;
  while (state) {
    const int pos = std::countr_zero(state);
    r += c[pos][++k];
    state &= state - 1;
  }
  return static_cast<std::size_t>(r);
}

Sector build_sector(const FiniteLattice& lattice, int n_particles, double memory_budget) {
  return Sector(lattice.num_sites(), n_particles, memory_budget);
}

int particle_count(int flux_quanta_per_cell, int q, int lx, int ly, double nu) {
  if (q < 1 || lx < 1 || ly < 1) throw ConfigError("particle count needs positive q and torus size");
  if (!(nu >= 0) || nu > 1) throw ConfigError("filling must lie in [0, 1]");
  // Per-plaquette flux fraction f = quanta / q, folded into [-1/2, 1/2).
  int num = flux_quanta_per_cell % q;
  if (num < 0) num += q;
  if (2 * num >= q) num -= q;
  const double flux = std::fabs(static_cast<double>(num) * lx * ly / q);
  const double n = nu * flux;
  const double r = std::round(n);
  if (std::fabs(n - r) > 1e-9 || std::fabs(flux - std::round(flux)) > 1e-9) {
    std::ostringstream msg;
    msg << "filling " << nu << " on a " << lx << "x" << ly << " torus gives " << n
        << " particles; choose lx*ly so that nu*lx*ly*" << std::abs(num) << "/" << q << " is an integer";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(r);
}

int particle_count(const FiniteLattice& lattice, const CouplingParams& params, double nu) {
  const auto& spec = lattice.spec();
  return particle_count(total_flux_quanta(spec, params), spec.q, lattice.lx(), lattice.ly(), nu);
}

double energy_scale(const CouplingGraph& graph) {
  double sum = 0;
  int count = 0;
  for (const auto& c : graph.couplings)
    if (std::abs(c.dcol) + std::abs(c.drow) == 1) {
      sum += std::abs(c.amplitude);
      ++count;
    }
  if (count == 0) throw ConfigError("graph has no nearest-neighbor bonds");
  return sum / count;
}

ManyBodyHamiltonian::ManyBodyHamiltonian(const Sector& sector, const CouplingGraph& graph, Twist twist, int threads)
    : sector_(&sector), twist_(twist), threads_(std::max(1, threads)) {
  const int n = graph.lattice.num_sites();
  if (n != sector.num_sites()) throw ConfigError("graph and sector disagree on the number of sites");
  const Eigen::MatrixXcd h = hopping_matrix(graph, twist.theta_x, twist.theta_y);
  incoming_.resize(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (h(j, i) != cplx(0, 0)) {
        incoming_[j].push_back({i, h(j, i)});
        max_hop_ = std::max(max_hop_, std::abs(h(j, i)));
      }
}

void ManyBodyHamiltonian::apply_range(const Eigen::VectorXcd& x, Eigen::VectorXcd& y, std::size_t begin,
                                      std::size_t end) const {
  const auto& basis = sector_->basis();
  for (std::size_t r = begin; r < end; ++r) {
    const std::uint64_t s = basis[r];
    cplx acc = 0;
    // <s| H |s'> = h(j, i) where s' has the particle at i instead of j.
    for (std::uint64_t occ = s; occ; occ &= occ - 1) {
      const int j = std::countr_zero(occ);
      for (const auto& in : incoming_[j]) {
        if (in.from == j) {
          acc += in.amplitude * x[static_cast<Eigen::Index>(r)];
          continue;
        }
        const std::uint64_t bit = 1ULL << in.from;
        if (s & bit) continue;
        const std::uint64_t source = (s ^ (1ULL << j)) | bit;
        acc += in.amplitude * x[static_cast<Eigen::Index>(sector_->rank(source))];
      }
    }
    y[static_cast<Eigen::Index>(r)] = acc;
  }
}

void ManyBodyHamiltonian::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  const std::size_t d = dim();
  y.resize(static_cast<Eigen::Index>(d));
  const std::size_t workers = std::min<std::size_t>(threads_, std::max<std::size_t>(1, d / 4096));
  if (workers <= 1) {
    apply_range(x, y, 0, d);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (d + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(d, b + chunk);
    if (b < e) pool.emplace_back([&, b, e] { apply_range(x, y, b, e); });
  }
  for (auto& t : pool) t.join();
}

LinearOperator ManyBodyHamiltonian::as_operator() const {
  return [this](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { apply(x, y); };
}

Eigen::MatrixXcd ManyBodyHamiltonian::dense() const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXcd m(d, d);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d);
  Eigen::VectorXcd col(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    e[c] = 1;
    apply(e, col);
    m.col(c) = col;
    e[c] = 0;
  }
  return m;
}

EDResult lowest_eigs(const ManyBodyHamiltonian& h, const EDOptions& options, const Eigen::MatrixXcd* guess) {
  const auto d = static_cast<Eigen::Index>(h.dim());
  EigenPairs pairs = lanczos_lowest(h.as_operator(), d, options.lanczos, guess);
  EDResult out;
  out.twist = h.twist();
  out.eigenvalues = pairs.values;
  out.eigenvectors = std::move(pairs.vectors);
  out.residuals.resize(out.eigenvalues.size());
  Eigen::VectorXcd hv(d);
  for (Eigen::Index k = 0; k < out.eigenvalues.size(); ++k) {
    h.apply(out.eigenvectors.col(k), hv);
    out.residuals[k] = (hv - out.eigenvalues[k] * out.eigenvectors.col(k)).norm();
  }
  return out;
}

std::vector<EDResult> twist_scan(const Sector& sector, const CouplingGraph& graph, TwistAxis axis, double fixed_angle,
                                 int points, const EDOptions& options) {
  if (points < 2) throw ConfigError("twist scan needs at least two points");
  std::vector<EDResult> out;
  out.reserve(points);
  for (int k = 0; k < points; ++k) {
    const double theta = 2 * std::numbers::pi * k / (points - 1);
    const Twist tw = axis == TwistAxis::x ? Twist{theta, fixed_angle} : Twist{fixed_angle, theta};
    ManyBodyHamiltonian h(sector, graph, tw, options.threads);
    const Eigen::MatrixXcd* guess = out.empty() ? nullptr : &out.back().eigenvectors;
    out.push_back(lowest_eigs(h, options, guess));
  }
  return out;
}

double ChernResult::min_gap() const { return *std::min_element(gap_map.begin(), gap_map.end()); }

double ChernResult::max_splitting() const { return *std::max_element(splitting_map.begin(), splitting_map.end()); }

ChernResult many_body_chern(const Sector& sector, const CouplingGraph& graph, int grid, int manifold_dim,
                            const EDOptions& ed, const ChernOptions& options) {
  if (grid < 2) throw ConfigError("twist grid needs at least 2 x 2 points");
  if (manifold_dim < 1) throw ConfigError("manifold dimension must be positive");
  const int n = grid;
  const auto d = static_cast<Eigen::Index>(sector.dim());

  ChernResult out;
  out.grid = n;
  out.manifold_dim = static_cast<int>(std::min<Eigen::Index>(manifold_dim, d));
  out.energy_scale = options.energy_scale > 0 ? options.energy_scale : energy_scale(graph);
  out.gap_map.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.splitting_map.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.field.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.energies.resize(static_cast<std::size_t>(n) * n);

  EDOptions local = ed;
  local.lanczos.nev = std::max(local.lanczos.nev, manifold_dim + 1);
  const int m = out.manifold_dim;

  auto solve = [&](int i, int j, const Eigen::MatrixXcd* guess) {
    const Twist tw{2 * std::numbers::pi * i / n, 2 * std::numbers::pi * (j % n) / n};
    ManyBodyHamiltonian h(sector, graph, tw, local.threads);
    EDResult r = lowest_eigs(h, local, guess);
    if (j < n) {
      const std::size_t idx = static_cast<std::size_t>(j) * n + i;
      const auto& e = r.eigenvalues;
      out.splitting_map[idx] = e[m - 1] - e[0];
      out.gap_map[idx] = e.size() > m ? e[m] - e[m - 1] : std::numeric_limits<double>::infinity();
      out.energies[idx] = e;
    }
    return Eigen::MatrixXcd(r.eigenvectors.leftCols(m));
  };

  // One row of states is kept; row 0 is recomputed at the end to close the
  // torus, so its bottom links are taken from the recomputed states too.
  std::vector<Eigen::MatrixXcd> row(n);
  std::vector<double> ax_prev(n), ax_cur(n), ay(n);
  for (int i = 0; i < n; ++i) {
    row[i] = solve(i, 0, i > 0 ? &row[i - 1] : nullptr);
    if (i > 0) ax_prev[i - 1] = link_angle(row[i - 1], row[i]);
  }
  ax_prev[n - 1] = link_angle(row[n - 1], row[0]);

  double total = 0;
  for (int j = 1; j <= n; ++j) {
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXcd next = solve(i, j, &row[i]);
      ay[i] = link_angle(row[i], next);
      row[i] = std::move(next);
      if (i > 0) ax_cur[i - 1] = link_angle(row[i - 1], row[i]);
    }
    ax_cur[n - 1] = link_angle(row[n - 1], row[0]);
    for (int i = 0; i < n; ++i) {
      const double f = field_strength(ax_prev[i], ay[(i + 1) % n], ax_cur[i], ay[i]);
      out.field[static_cast<std::size_t>(j - 1) * n + i] = f;
      total += f;
    }
    std::swap(ax_prev, ax_cur);
  }

  if (out.min_gap() <= options.gap_tol * out.energy_scale) {
    std::ostringstream msg;
    msg << "ground manifold of dimension " << m << " not gapped on the twist grid: min gap " << out.min_gap()
        << " <= " << options.gap_tol * out.energy_scale;
    throw GapClosureError(msg.str(), out.gap_map);
  }
  out.raw_chern = chern_from_field(total);
  out.chern = checked_integer(out.raw_chern, options.integer_tol);
  return out;
}

}  // namespace rydflux
