#include "rydflux/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rydflux/errors.hpp"

namespace rydflux {

namespace {

Eigen::VectorXcd random_vector(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = {normal(rng), normal(rng)};
  return v;
}

// Orthogonalize w against the first `cols` columns of V, twice.
// Returns the accumulated coefficients.
Eigen::VectorXcd orthogonalize(const Eigen::MatrixXcd& V, Eigen::Index cols, Eigen::VectorXcd& w) {
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(cols);
  if (cols == 0) return h;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXcd c = V.leftCols(cols).adjoint() * w;
    w.noalias() -= V.leftCols(cols) * c;
    h += c;
  }
  return h;
}

// V.leftCols(keep) <- V.leftCols(m) * Y.leftCols(keep), in row blocks.
void rotate_basis(Eigen::MatrixXcd& V, Eigen::Index m, const Eigen::MatrixXcd& Y, Eigen::Index keep) {
  constexpr Eigen::Index kBlock = 4096;
  Eigen::MatrixXcd tmp;
  for (Eigen::Index r = 0; r < V.rows(); r += kBlock) {
    const Eigen::Index nr = std::min(kBlock, V.rows() - r);
    tmp.noalias() = V.block(r, 0, nr, m) * Y.leftCols(keep);
    V.block(r, 0, nr, keep) = tmp;
  }
}

}  // namespace

EigenPairs dense_lowest(const Eigen::MatrixXcd& matrix, int nev) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix);
  const int k = std::min<int>(nev, static_cast<int>(matrix.rows()));
  EigenPairs out;
  out.values = solver.eigenvalues().head(k);
  out.vectors = solver.eigenvectors().leftCols(k);
  out.residuals = Eigen::VectorXd::Zero(k);
  return out;
}

namespace {

struct Run {
  EigenPairs pairs;
  double norm_estimate = 0;
};

// Thick-restart Lanczos on the complement of the columns of `locked`.
Run thick_restart(const LinearOperator& op, Eigen::Index dim, Eigen::Index nev, Eigen::Index m,
                  const Eigen::MatrixXcd& locked, Eigen::VectorXcd start, const LanczosOptions& options,
                  std::mt19937_64& rng) {
  const Eigen::Index space = dim - locked.cols();
  Run run;
  EigenPairs& out = run.pairs;
  auto deflate = [&](Eigen::VectorXcd& v) {
    if (locked.cols() > 0) orthogonalize(locked, locked.cols(), v);
  };

  deflate(start);
  Eigen::MatrixXcd V(dim, m);
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(m, m);
  V.col(0) = start / start.norm();
  Eigen::Index kept = 0;
  Eigen::VectorXcd w(dim);
  Eigen::VectorXcd residual_vec(dim);
  double beta_last = 0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    for (Eigen::Index j = kept; j < m; ++j) {
      op(V.col(j), w);
      ++out.matvecs;
      deflate(w);
      const Eigen::VectorXcd h = orthogonalize(V, j + 1, w);
      T.col(j).head(j + 1) = h;
      T.row(j).head(j + 1) = h.adjoint();
      double beta = w.norm();
      if (j + 1 == space) {
        beta = 0;
      } else if (beta < 1e-13 * std::max(1.0, h.norm())) {
        // Invariant subspace found: continue with a fresh direction.
        w = random_vector(dim, rng);
        deflate(w);
        orthogonalize(V, j + 1, w);
        w /= w.norm();
        beta = 0;
      } else {
        w /= beta;
      }
      if (j + 1 < m) {
        V.col(j + 1) = w;
        T(j + 1, j) = beta;
        T(j, j + 1) = beta;
      } else {
        residual_vec = w;
        beta_last = beta;
      }
    }

    const Eigen::MatrixXcd Tsym = 0.5 * (T + T.adjoint().eval());
    solver.compute(Tsym);
    const Eigen::VectorXd& theta = solver.eigenvalues();
    const Eigen::MatrixXcd& Y = solver.eigenvectors();
    run.norm_estimate = std::max({run.norm_estimate, std::fabs(theta[0]), std::fabs(theta[m - 1])});
    const double scale = std::max(run.norm_estimate, 1e-300);

    Eigen::VectorXd res(nev);
    for (Eigen::Index i = 0; i < nev; ++i) res[i] = std::abs(beta_last * Y(m - 1, i));
    out.restarts = restart;

    const bool whole_space = m == space;
    if (whole_space || res.maxCoeff() < options.tol * scale) {
      rotate_basis(V, m, Y, nev);
      out.values = theta.head(nev);
      out.vectors = V.leftCols(nev);
      out.residuals = whole_space ? Eigen::VectorXd::Zero(nev) : res;
      return run;
    }

    // Thick restart: keep the lowest Ritz vectors plus the residual direction.
    kept = std::min<Eigen::Index>(m - 1, nev + (m - nev) / 2);
    rotate_basis(V, m, Y, kept);
    V.col(kept) = residual_vec;
    // Column `kept` is rebuilt by the next expansion step.
    T.setZero();
    for (Eigen::Index i = 0; i < kept; ++i) T(i, i) = theta[i];
    out.residuals = res;
  }

  std::ostringstream msg;
  msg << "Lanczos did not converge after " << options.max_restarts << " restarts; residuals";
  for (Eigen::Index i = 0; i < out.residuals.size(); ++i)
    msg << ' ' << out.residuals[i] / std::max(run.norm_estimate, 1e-300);
  throw NumericalError(msg.str());
}

// Rayleigh-Ritz on span(a, b); keeps the lowest nev pairs with true residuals.
EigenPairs merge(const LinearOperator& op, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, Eigen::Index nev,
                 int& matvecs) {
  Eigen::MatrixXcd Q(a.rows(), a.cols() + b.cols());
  Q << a, b;
  Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(Q).householderQ() * Eigen::MatrixXcd::Identity(Q.rows(), Q.cols());
  Eigen::MatrixXcd HQ(Q.rows(), Q.cols());
  Eigen::VectorXcd y(Q.rows());
  for (Eigen::Index c = 0; c < Q.cols(); ++c) {
    op(Q.col(c), y);
    HQ.col(c) = y;
    ++matvecs;
  }
  const Eigen::MatrixXcd R = Q.adjoint() * HQ;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (R + R.adjoint()));
  EigenPairs out;
  out.values = solver.eigenvalues().head(nev);
  const Eigen::MatrixXcd Y = solver.eigenvectors().leftCols(nev);
  out.vectors = Q * Y;
  const Eigen::MatrixXcd r = HQ * Y - out.vectors * out.values.cast<std::complex<double>>().asDiagonal();
  out.residuals = r.colwise().norm().transpose();
  return out;
}

}  // namespace

EigenPairs lanczos_lowest(const LinearOperator& op, Eigen::Index dim, const LanczosOptions& options,
                          const Eigen::MatrixXcd* guess) {
  if (options.nev < 1) throw ConfigError("need at least one eigenpair");
  if (dim < 1) throw ConfigError("empty operator");
  const Eigen::Index nev = std::min<Eigen::Index>(options.nev, dim);
  const Eigen::Index m = std::min<Eigen::Index>(std::max<Eigen::Index>(options.ncv, 2 * nev + 2), dim);

  std::mt19937_64 rng(options.seed);
  Eigen::VectorXcd start = random_vector(dim, rng);
  if (guess && guess->cols() > 0 && guess->rows() == dim) {
    // Mostly the guess subspace, with enough noise to reach missed directions.
    Eigen::VectorXcd mix = Eigen::VectorXcd::Zero(dim);
    std::normal_distribution<double> normal;
    for (Eigen::Index c = 0; c < guess->cols(); ++c) mix += std::complex<double>(normal(rng), normal(rng)) * guess->col(c);
    start = mix / mix.norm() + 1e-3 * start / start.norm();
  }

  Run run = thick_restart(op, dim, nev, m, Eigen::MatrixXcd(dim, 0), start, options, rng);
  EigenPairs out = std::move(run.pairs);
  if (m == dim || !options.resolve_degeneracy) return out;

  // A single Krylov space sees one vector of an exactly degenerate eigenspace.
  // Search the complement of the converged vectors for anything lower.
  for (Eigen::Index round = 0; round < nev; ++round) {
    const Eigen::Index space = dim - nev;
    const Eigen::Index nd = std::min<Eigen::Index>(nev, space);
    const Eigen::Index md = std::min<Eigen::Index>(std::max<Eigen::Index>(m, 2 * nd + 2), space);
    if (nd < 1) break;
    Run extra = thick_restart(op, dim, nd, md, out.vectors, random_vector(dim, rng), options, rng);
    out.matvecs += extra.pairs.matvecs;
    out.restarts += extra.pairs.restarts;
    const double scale = std::max({run.norm_estimate, extra.norm_estimate, 1e-300});
    if (!(extra.pairs.values[0] < out.values[nev - 1] - options.tol * scale)) break;
    int matvecs = out.matvecs;
    const int restarts = out.restarts;
    out = merge(op, out.vectors, extra.pairs.vectors, nev, matvecs);
    out.matvecs = matvecs;
    out.restarts = restarts;
  }
  return out;
}

}  // namespace rydflux
