#pragma once

#include <filesystem>

#include <Eigen/Dense>

#include "fmapdiag/eigensolver.hpp"
#include "fmapdiag/graph_laplacian.hpp"

namespace fmapdiag {

/// Eigenpairs with eigenvalue below this are treated as trivial
/// (constant modes, one per connected component) and dropped.
inline constexpr double kTrivialEigenvalueThreshold = 1e-9;

/// Truncated non-trivial Laplacian eigenbasis. Columns are orthonormal and
/// sign-normalized; eigenvalues are nondecreasing and above the trivial
/// threshold.
class SpectralBasis {
 public:
  SpectralBasis(Eigen::MatrixXd vectors, Eigen::VectorXd values);

  const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index n_points() const noexcept { return vectors_.rows(); }
  Eigen::Index dim() const noexcept { return vectors_.cols(); }

  /// The first `k` pairs.
  SpectralBasis truncated(Eigen::Index k) const;

 private:
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd values_;
};

enum class EigenSolverKind { automatic, dense, lanczos };

struct SpectralBasisOptions {
  EigenSolverKind solver = EigenSolverKind::automatic;
  /// `automatic` uses the dense solver up to this many points.
  Eigen::Index dense_limit = 2000;
  LanczosOptions lanczos{};
};

/// Flips each column so its entry of largest magnitude is positive; among
/// entries tied in magnitude the lowest index decides.
void normalize_signs(Eigen::MatrixXd& vectors);

/// The `k_s` smallest non-trivial eigenpairs of `laplacian`.
SpectralBasis spectral_basis(const Laplacian& laplacian, Eigen::Index k_s, const SpectralBasisOptions& options = {});

/// Writes `<stem>.values.emb` (1 x k) and `<stem>.vectors.emb` (N x k).
void save_basis(const SpectralBasis& basis, const std::filesystem::path& stem);

struct HksDescriptor {
  Eigen::MatrixXd values;  ///< N x Q, column q is the signature at scales(q)
  Eigen::VectorXd scales;
};

/// Q scales geometrically spaced from 4 ln10 / lambda_max to
/// 4 ln10 / lambda_min, ascending.
Eigen::VectorXd hks_scales(const SpectralBasis& basis, int num_scales);
Eigen::VectorXd hks_scales(double lambda_min, double lambda_max, int num_scales);

/// Heat kernel signature sum_j exp(-lambda_j t) phi_j(i)^2 at each scale.
HksDescriptor hks(const SpectralBasis& basis, const Eigen::VectorXd& scales);

}  // namespace fmapdiag
