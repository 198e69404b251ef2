#include "fmapdiag/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "fmapdiag/error.hpp"
#include "fmapdiag/log.hpp"

namespace fmapdiag {

double spectral_distance(const Eigen::VectorXd& source_values, const Eigen::VectorXd& target_values) {
  if (source_values.size() != target_values.size()) {
    throw InvalidArgument("spectral distance needs spectra of equal length (" + std::to_string(source_values.size()) +
                          " vs " + std::to_string(target_values.size()) + ")");
  }
  if (source_values.size() == 0) throw InvalidArgument("spectral distance of empty spectra");
  const double src_max = source_values.maxCoeff();
  const double tgt_max = target_values.maxCoeff();
  if (!(src_max > 0.0) || !(tgt_max > 0.0)) throw InvalidArgument("spectral distance needs a positive largest eigenvalue");
  const Eigen::ArrayXd diff = source_values.array() / src_max - target_values.array() / tgt_max;
  return std::sqrt(diff.square().mean());
}

DiagonalDominance diagonal_dominance(const FunctionalMap& map) {
  if (!map.square()) throw InvalidArgument("diagonal dominance needs a square map");
  const Eigen::MatrixXd& c = map.matrix();
  DiagonalDominance out;
  out.per_index.resize(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const double row_energy = c.row(i).squaredNorm();
    if (row_energy == 0.0) {
      out.per_index(i) = 0.0;
      out.zero_rows.push_back(i);
      warn("functional map row " + std::to_string(i) + " is all zero; diagonal dominance set to 0");
    } else {
      out.per_index(i) = c(i, i) * c(i, i) / row_energy;
    }
  }
  out.mean = out.per_index.mean();
  return out;
}

double orthogonality_error(const FunctionalMap& map) {
  if (!map.square()) throw InvalidArgument("orthogonality error needs a square map");
  const Eigen::MatrixXd& c = map.matrix();
  const Eigen::Index k = c.cols();
  return (c.transpose() * c - Eigen::MatrixXd::Identity(k, k)).norm() / static_cast<double>(k);
}

double commutativity_error(const FunctionalMap& map, const Eigen::VectorXd& source_values,
                           const Eigen::VectorXd& target_values) {
  if (source_values.size() != map.source_dim() || target_values.size() != map.target_dim()) {
    throw InvalidArgument("eigenvalue vectors do not match functional map dimensions");
  }
  const Eigen::MatrixXd& c = map.matrix();
  return (c * source_values.asDiagonal() - target_values.asDiagonal() * c).norm();
}

std::vector<Eigen::Index> degenerate_indices(const Eigen::VectorXd& source_values,
                                             const Eigen::VectorXd& target_values) {
  std::vector<Eigen::Index> out;
  const Eigen::Index k = std::min(source_values.size(), target_values.size());
  auto near_neighbour = [](const Eigen::VectorXd& v, Eigen::Index i) {
    return (i > 0 && std::abs(v(i) - v(i - 1)) < kDegenerateEigenvalueGap) ||
           (i + 1 < v.size() && std::abs(v(i + 1) - v(i)) < kDegenerateEigenvalueGap);
  };
  for (Eigen::Index i = 0; i < k; ++i) {
    if (near_neighbour(source_values, i) || near_neighbour(target_values, i)) out.push_back(i);
  }
  return out;
}

DiagnosticsReport diagnose(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target) {
  if (!map.square()) throw InvalidArgument("diagnostics need a square functional map");
  const Eigen::Index k = map.source_dim();
  if (source.dim() < k || target.dim() < k) throw InvalidArgument("bases are smaller than the functional map");
  const Eigen::VectorXd src = source.values().head(k);
  const Eigen::VectorXd tgt = target.values().head(k);

  DiagnosticsReport report;
  report.spectral_distance = spectral_distance(src, tgt);
  auto dominance = diagonal_dominance(map);
  report.diag_dominance = std::move(dominance.per_index);
  report.diag_dominance_mean = dominance.mean;
  report.orthogonality_error = orthogonality_error(map);
  report.commutativity_error = commutativity_error(map, src, tgt);
  report.source_eigenvalue_range = {src.minCoeff(), src.maxCoeff()};
  report.target_eigenvalue_range = {tgt.minCoeff(), tgt.maxCoeff()};
  report.degenerate_indices = degenerate_indices(src, tgt);
  return report;
}

bool ThresholdProfile::passes(const DiagnosticsReport& report) const {
  return report.spectral_distance < max_spectral_distance && report.diag_dominance_mean > min_diag_dominance_mean &&
         report.orthogonality_error < max_orthogonality_error;
}

}  // namespace fmapdiag
