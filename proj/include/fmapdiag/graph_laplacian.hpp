#pragma once

#include <filesystem>

#include <Eigen/Sparse>

#include "fmapdiag/dataio.hpp"

namespace fmapdiag {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric nonnegative affinity matrix with zero diagonal and weights in
/// (0, 1].
class AffinityGraph {
 public:
  /// Validates symmetry, zero diagonal and the weight range.
  AffinityGraph(SparseMatrix weights, double bandwidth, int knn_k);

  const SparseMatrix& weights() const noexcept { return weights_; }
  double bandwidth() const noexcept { return bandwidth_; }
  int knn_k() const noexcept { return knn_k_; }
  Eigen::Index n_points() const noexcept { return weights_.rows(); }

  /// Number of connected components (edges with nonzero weight).
  int component_count() const;

 private:
  SparseMatrix weights_;
  double bandwidth_;
  int knn_k_;
};

/// Gaussian-weighted, symmetrized k-nearest-neighbour graph. The bandwidth
/// is the mean distance from each point to its k-th nearest neighbour.
/// Neighbours are found by exact brute force; equal distances resolve to
/// the lower point index. Warns when the result is disconnected.
AffinityGraph knn_graph(const EmbeddingMatrix& z, int k);

/// L = I - D^{-1/2} W D^{-1/2}.
class Laplacian {
 public:
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const Eigen::VectorXd& degrees() const noexcept { return degrees_; }
  Eigen::Index n_points() const noexcept { return matrix_.rows(); }

 private:
  friend Laplacian normalized_laplacian(const AffinityGraph& graph);
  Laplacian(SparseMatrix m, Eigen::VectorXd d) : matrix_(std::move(m)), degrees_(std::move(d)) {}

  SparseMatrix matrix_;
  Eigen::VectorXd degrees_;
};

/// Throws InvalidArgument naming the first vertex with zero degree.
Laplacian normalized_laplacian(const AffinityGraph& graph);

/// Coordinate-list dump "i,j,w" of every stored weight.
void write_weights_csv(const AffinityGraph& graph, const std::filesystem::path& path);

}  // namespace fmapdiag
