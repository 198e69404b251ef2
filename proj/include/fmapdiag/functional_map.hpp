#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmapdiag/dataio.hpp"
#include "fmapdiag/spectral_basis.hpp"

namespace fmapdiag {

/// Linear operator taking spectral coefficients in a source basis
/// (source_dim) to coefficients in a target basis (target_dim). The
/// matrix is target_dim x source_dim.
class FunctionalMap {
 public:
  explicit FunctionalMap(Eigen::MatrixXd matrix);

  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  Eigen::Index source_dim() const noexcept { return matrix_.cols(); }
  Eigen::Index target_dim() const noexcept { return matrix_.rows(); }
  bool square() const noexcept { return matrix_.rows() == matrix_.cols(); }

  static FunctionalMap identity(Eigen::Index k) { return FunctionalMap(Eigen::MatrixXd::Identity(k, k)); }

 private:
  Eigen::MatrixXd matrix_;
};

/// Spectral coefficients of corresponding probe functions on both sides.
struct ProbeCoeffs {
  Eigen::MatrixXd source;  ///< k_src x |S|
  Eigen::MatrixXd target;  ///< k_tgt x |S|
};

/// Coefficients of heat-smoothed indicator functions at `anchors`:
/// column s is exp(-Lambda t) Phi^T e_s.
Eigen::MatrixXd probe_matrix(const SpectralBasis& basis, std::span<const Eigen::Index> anchors, double smoothing);

/// Probe coefficients for both sides of an anchor set.
ProbeCoeffs anchor_probes(const SpectralBasis& source, const SpectralBasis& target, const AnchorSet& anchors,
                          double smoothing);

struct FmapWeights {
  double commutativity = 0.1;  ///< lambda_1
  double tikhonov = 0.001;     ///< lambda_2
};

/// Minimizer of ||C A - B||^2 + l1 ||C Ls - Lt C||^2 + l2 ||C||^2.
///
/// The commutativity term is diagonal in the entries of C, so the problem
/// splits into one ridge system per row of C:
///   (A A^T + l1 diag_j((ls_j - lt_i)^2) + l2 I) c_i = A b_i
/// where b_i is row i of B. Throws NumericalError when a row system is
/// singular, which can only happen with l2 = 0 and rank-deficient probes.
FunctionalMap solve_fmap(const ProbeCoeffs& probes, const Eigen::VectorXd& source_values,
                         const Eigen::VectorXd& target_values, const FmapWeights& weights);

/// Descriptor-driven variant: probes are the spectral coefficients of
/// heat kernel signatures computed at matching scales on both sides.
FunctionalMap solve_fmap_unsupervised(const HksDescriptor& source_hks, const HksDescriptor& target_hks,
                                      const SpectralBasis& source, const SpectralBasis& target,
                                      const FmapWeights& weights);

/// Length-N assignment: entry i is the index of the matched target point.
struct PointwiseMap {
  std::vector<Eigen::Index> assignment;
};

/// For every source point, the nearest target point in mapped spectral
/// coordinates: argmin_j || C phi_src(i) - phi_tgt(j) ||, ties to lower j.
/// Bases are truncated to the map's dimensions.
PointwiseMap pointwise_from_fmap(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target);

/// Nearest orthogonal matrix U V^T from the SVD of a square matrix.
Eigen::MatrixXd nearest_orthogonal(const Eigen::MatrixXd& m);

struct ZoomOutSchedule {
  Eigen::Index start = 50;
  Eigen::Index max = 100;
  int steps = 5;

  /// Dimensions visited: start, ..., max (steps + 1 entries).
  std::vector<Eigen::Index> dimensions() const;
};

/// Spectral upsampling refinement. Each step recovers a pointwise map at
/// the current dimension, re-estimates C = Phi_tgt^T P Phi_src at the next
/// dimension and replaces it by its nearest orthogonal matrix. When `trace`
/// is given, every intermediate map (after projection) is appended.
FunctionalMap zoomout(const FunctionalMap& initial, const SpectralBasis& source, const SpectralBasis& target,
                      const ZoomOutSchedule& schedule, std::vector<FunctionalMap>* trace = nullptr);

/// Map a->c obtained by following a->b then b->c.
FunctionalMap compose(const FunctionalMap& a_to_b, const FunctionalMap& b_to_c);

/// Binary matrix dump plus "<path>.json" sidecar holding dims and a
/// config hash.
void save_fmap(const FunctionalMap& map, const std::filesystem::path& path, const std::string& config_json);

/// 64-bit FNV-1a, hex encoded.
std::string config_hash(const std::string& text);

}  // namespace fmapdiag
