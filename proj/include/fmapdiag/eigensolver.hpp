#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fmapdiag {

/// Eigenpairs sorted by ascending eigenvalue; column j of `vectors`
/// belongs to `values(j)`.
struct Eigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Smallest `count` eigenpairs of a symmetric matrix by a full dense solve.
Eigenpairs smallest_eigenpairs_dense(const Eigen::SparseMatrix<double>& a, Eigen::Index count);

enum class SpectralTransform {
  /// Lanczos on (A + shift I)^{-1}; needs A + shift I positive definite.
  shift_invert,
  /// Lanczos on (upper_bound I - A); matrix-vector products only.
  flip,
};

struct LanczosOptions {
  SpectralTransform transform = SpectralTransform::shift_invert;
  double shift = 1e-3;
  /// Upper bound on the spectrum, used by SpectralTransform::flip.
  double upper_bound = 2.0;
  /// Relative residual tolerance on the transformed operator.
  double tolerance = 1e-10;
  /// Krylov subspace size; 0 picks max(2*count + 1, count + 20).
  Eigen::Index subspace = 0;
  int max_restarts = 1000;
  std::uint64_t seed = 0x5eed;
};

/// Smallest `count` eigenpairs of a symmetric positive semi-definite sparse
/// matrix by thick-restart Lanczos with full reorthogonalization. Returned
/// eigenvalues are Rayleigh quotients of the converged Ritz vectors.
/// Throws NumericalError if the iteration does not converge.
Eigenpairs smallest_eigenpairs_lanczos(const Eigen::SparseMatrix<double>& a, Eigen::Index count,
                                       const LanczosOptions& options = {});

}  // namespace fmapdiag
