#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace rydflux {

/// y = A x for a hermitian operator; y is sized by the caller.
using LinearOperator = std::function<void(const Eigen::VectorXcd& x, Eigen::VectorXcd& y)>;

struct LanczosOptions {
  int nev = 6;
  int ncv = 24;            // Krylov subspace size
  int max_restarts = 1000;
  double tol = 1e-10;      // residual / ||A||
  std::uint64_t seed = 12345;
  /// Re-run on the complement of the converged vectors to catch copies of
  /// exactly degenerate eigenvalues.
  bool resolve_degeneracy = true;
};

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXcd vectors;  // columns
  Eigen::VectorXd residuals;
  int restarts = 0;
  int matvecs = 0;
};

/// Lowest `nev` eigenpairs by thick-restart Lanczos with full
/// reorthogonalization. `guess` columns, if given, seed the start vector.
/// Residuals are |beta y_m| estimates, or true norms after a degeneracy merge.
EigenPairs lanczos_lowest(const LinearOperator& op, Eigen::Index dim, const LanczosOptions& options,
                          const Eigen::MatrixXcd* guess = nullptr);

/// Dense reference: all eigenpairs of an explicit hermitian matrix.
EigenPairs dense_lowest(const Eigen::MatrixXcd& matrix, int nev);

}  // namespace rydflux
