#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fmapdiag/functional_map.hpp"
#include "fmapdiag/spectral_basis.hpp"

namespace fmapdiag {

/// Eigenvalues closer than this to a neighbour mark a degenerate block in
/// which eigenvector order (and therefore rho_i) is gauge-dependent.
inline constexpr double kDegenerateEigenvalueGap = 1e-8;

/// RMS difference of the two spectra after dividing each by its largest
/// entry. Symmetric, and invariant to positive rescaling of either side.
double spectral_distance(const Eigen::VectorXd& source_values, const Eigen::VectorXd& target_values);

struct DiagonalDominance {
  Eigen::VectorXd per_index;  ///< rho_i = C_ii^2 / sum_j C_ij^2
  double mean = 0.0;
  std::vector<Eigen::Index> zero_rows;  ///< rows reported as rho_i = 0
};

/// Rows that are entirely zero get rho_i = 0 and a warning.
DiagonalDominance diagonal_dominance(const FunctionalMap& map);

/// (1/k) || C^T C - I ||_F.
double orthogonality_error(const FunctionalMap& map);

/// || C diag(source_values) - diag(target_values) C ||_F.
double commutativity_error(const FunctionalMap& map, const Eigen::VectorXd& source_values,
                           const Eigen::VectorXd& target_values);

/// Indices whose eigenvalue lies within kDegenerateEigenvalueGap of a
/// neighbour in either spectrum.
std::vector<Eigen::Index> degenerate_indices(const Eigen::VectorXd& source_values,
                                             const Eigen::VectorXd& target_values);

struct DiagnosticsReport {
  double spectral_distance = 0.0;
  Eigen::VectorXd diag_dominance;
  double diag_dominance_mean = 0.0;
  double orthogonality_error = 0.0;
  double commutativity_error = 0.0;
  std::pair<double, double> source_eigenvalue_range{0.0, 0.0};
  std::pair<double, double> target_eigenvalue_range{0.0, 0.0};
  std::vector<Eigen::Index> degenerate_indices;
};

/// All diagnostics of `map` solved between `source` and `target` bases
/// (truncated to the map's dimensions). The map must be square.
DiagnosticsReport diagnose(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target);

/// Reference thresholds; the default values are those typical of
/// near-isometric shape correspondence.
struct ThresholdProfile {
  double max_spectral_distance = 0.01;
  double min_diag_dominance_mean = 0.7;
  double max_orthogonality_error = 0.1;

  bool passes(const DiagnosticsReport& report) const;
};

inline constexpr ThresholdProfile kShapeMatchingProfile{};

}  // namespace fmapdiag
