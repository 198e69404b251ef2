#include "fmapdiag/spectral_basis.hpp"

#include <cmath>
#include <numbers>

#include "fmapdiag/dataio.hpp"
#include "fmapdiag/error.hpp"

namespace fmapdiag {

SpectralBasis::SpectralBasis(Eigen::MatrixXd vectors, Eigen::VectorXd values)
    : vectors_(std::move(vectors)), values_(std::move(values)) {
  if (vectors_.cols() != values_.size()) throw InvalidArgument("basis vector/value count mismatch");
  if (values_.size() < 1) throw InvalidArgument("spectral basis must hold at least one pair");
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    if (!(values_(j) > kTrivialEigenvalueThreshold)) {
      throw InvalidArgument("spectral basis eigenvalue " + std::to_string(j) + " is trivial");
    }
    if (j > 0 && values_(j) < values_(j - 1)) throw InvalidArgument("spectral basis eigenvalues must be nondecreasing");
  }
}

SpectralBasis SpectralBasis::truncated(Eigen::Index k) const {
  if (k < 1 || k > dim()) {
    throw InvalidArgument("cannot truncate a " + std::to_string(dim()) + "-dimensional basis to " + std::to_string(k));
  }
  return SpectralBasis(vectors_.leftCols(k), values_.head(k));
}

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    const double peak = col.cwiseAbs().maxCoeff();
    const double tie_tolerance = 1e-10 * peak;
    Eigen::Index pivot = 0;
    while (std::abs(col(pivot)) < peak - tie_tolerance) ++pivot;
    if (col(pivot) < 0.0) col = -col;
  }
}

SpectralBasis spectral_basis(const Laplacian& laplacian, Eigen::Index k_s, const SpectralBasisOptions& options) {
  const Eigen::Index n = laplacian.n_points();
  if (k_s < 1 || k_s + 1 > n) {
    throw InvalidArgument("k_s=" + std::to_string(k_s) + " too large for N=" + std::to_string(n) +
                          " (need k_s + 1 <= N)");
  }
  const bool dense = options.solver == EigenSolverKind::dense ||
                     (options.solver == EigenSolverKind::automatic && n <= options.dense_limit);

  Eigen::Index window = k_s + 1;
  while (true) {
    const Eigenpairs pairs = dense ? smallest_eigenpairs_dense(laplacian.matrix(), window)
                                   : smallest_eigenpairs_lanczos(laplacian.matrix(), window, options.lanczos);
    Eigen::Index trivial = 1;
    while (trivial < window && pairs.values(trivial) < kTrivialEigenvalueThreshold) ++trivial;
    if (window - trivial >= k_s) {
      Eigen::MatrixXd vectors = pairs.vectors.middleCols(trivial, k_s);
      normalize_signs(vectors);
      return SpectralBasis(std::move(vectors), pairs.values.segment(trivial, k_s));
    }
    if (trivial + k_s > n) {
      throw InvalidArgument("only " + std::to_string(n - trivial) + " non-trivial eigenpairs exist; k_s=" +
                            std::to_string(k_s) + " is too large");
    }
    window = trivial + k_s;
  }
}

void save_basis(const SpectralBasis& basis, const std::filesystem::path& stem) {
  save_matrix_binary(basis.values().transpose(), stem.string() + ".values.emb");
  save_matrix_binary(basis.vectors(), stem.string() + ".vectors.emb");
}

Eigen::VectorXd hks_scales(const SpectralBasis& basis, int num_scales) {
  return hks_scales(basis.values().minCoeff(), basis.values().maxCoeff(), num_scales);
}

Eigen::VectorXd hks_scales(double lambda_min, double lambda_max, int num_scales) {
  if (num_scales < 2) throw InvalidArgument("HKS needs at least 2 scales");
  if (!(lambda_max >= lambda_min)) throw InvalidArgument("HKS eigenvalue range is inverted");
  if (!(lambda_min > 0.0)) throw InvalidArgument("HKS scales need positive eigenvalues");
  const double log_lo = std::log(4.0 * std::numbers::ln10 / lambda_max);
  const double log_hi = std::log(4.0 * std::numbers::ln10 / lambda_min);
  Eigen::VectorXd scales(num_scales);
  for (int q = 0; q < num_scales; ++q) {
    scales(q) = std::exp(log_lo + (log_hi - log_lo) * q / (num_scales - 1));
  }
  scales(0) = 4.0 * std::numbers::ln10 / lambda_max;
  scales(num_scales - 1) = 4.0 * std::numbers::ln10 / lambda_min;
  return scales;
}

HksDescriptor hks(const SpectralBasis& basis, const Eigen::VectorXd& scales) {
  for (Eigen::Index q = 0; q < scales.size(); ++q) {
    if (!(scales(q) > 0.0)) throw InvalidArgument("HKS scales must be positive");
  }
  const Eigen::MatrixXd squared = basis.vectors().array().square().matrix();
  Eigen::MatrixXd decay(basis.dim(), scales.size());
  for (Eigen::Index q = 0; q < scales.size(); ++q) {
    decay.col(q) = (-basis.values().array() * scales(q)).exp().matrix();
  }
  return {squared * decay, scales};
}

}  // namespace fmapdiag
