#include "fmapdiag/graph_laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "fmapdiag/error.hpp"
#include "fmapdiag/log.hpp"

namespace fmapdiag {
namespace {

double squared_distance(const Eigen::MatrixXd& z, Eigen::Index i, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double diff = z(i, c) - z(j, c);
    s += diff * diff;
  }
  return s;
}

}  // namespace

AffinityGraph::AffinityGraph(SparseMatrix weights, double bandwidth, int knn_k)
    : weights_(std::move(weights)), bandwidth_(bandwidth), knn_k_(knn_k) {
  if (weights_.rows() != weights_.cols()) throw InvalidArgument("affinity matrix must be square");
  if (!(bandwidth_ > 0.0)) throw InvalidArgument("bandwidth must be positive");
  weights_.makeCompressed();
  const SparseMatrix transposed = weights_.transpose();
  if ((weights_ - transposed).norm() != 0.0) throw InvalidArgument("affinity matrix is not symmetric");
  for (Eigen::Index col = 0; col < weights_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(weights_, col); it; ++it) {
      if (it.row() == it.col() && it.value() != 0.0) {
        throw InvalidArgument("affinity matrix has a self-loop at vertex " + std::to_string(it.row()));
      }
      if (it.row() != it.col() && !(it.value() > 0.0 && it.value() <= 1.0)) {
        throw InvalidArgument("affinity weight outside (0, 1] at (" + std::to_string(it.row()) + "," +
                              std::to_string(it.col()) + ")");
      }
    }
  }
}

int AffinityGraph::component_count() const {
  const Eigen::Index n = weights_.rows();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int components = 0;
  for (Eigen::Index start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    std::queue<Eigen::Index> frontier;
    frontier.push(start);
    label[start] = components;
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      for (SparseMatrix::InnerIterator it(weights_, v); it; ++it) {
        if (it.value() > 0.0 && label[it.row()] < 0) {
          label[it.row()] = components;
          frontier.push(it.row());
        }
      }
    }
    ++components;
  }
  return components;
}

AffinityGraph knn_graph(const EmbeddingMatrix& embedding, int k) {
  const Eigen::MatrixXd& z = embedding.data();
  const Eigen::Index n = z.rows();
  if (k < 1 || k >= n) {
    throw InvalidArgument("knn k=" + std::to_string(k) + " must satisfy 1 <= k < N=" + std::to_string(n));
  }

  // neighbours[i] holds (squared distance, index) of the k nearest points.
  std::vector<std::vector<std::pair<double, Eigen::Index>>> neighbours(static_cast<std::size_t>(n));
  double kth_distance_sum = 0.0;
  std::vector<std::pair<double, Eigen::Index>> row;
  row.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(squared_distance(z, i, j), j);
    }
    std::partial_sort(row.begin(), row.begin() + k, row.end());
    neighbours[i].assign(row.begin(), row.begin() + k);
    kth_distance_sum += std::sqrt(neighbours[i].back().first);
  }

  const double sigma = kth_distance_sum / static_cast<double>(n);
  if (!(sigma > 0.0)) {
    throw InvalidArgument("kNN bandwidth is zero: every point has at least " + std::to_string(k) +
                          " exact duplicates; remove duplicate rows or increase k");
  }
  const double inv_sigma2 = 1.0 / (sigma * sigma);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * n * k));
  std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
  edges.reserve(static_cast<std::size_t>(n * k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [d2, j] : neighbours[i]) edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const auto& [i, j] : edges) {
    // Clamp so far-apart symmetrized edges stay present after underflow.
    const double w = std::max(std::exp(-squared_distance(z, i, j) * inv_sigma2), std::numeric_limits<double>::min());
    triplets.emplace_back(i, j, w);
    triplets.emplace_back(j, i, w);
  }
  SparseMatrix w(n, n);
  w.setFromTriplets(triplets.begin(), triplets.end());

  AffinityGraph graph(std::move(w), sigma, k);
  if (const int c = graph.component_count(); c > 1) {
    warn("kNN graph (k=" + std::to_string(k) + ") has " + std::to_string(c) +
         " connected components; expect extra near-zero eigenvalues");
  }
  return graph;
}

Laplacian normalized_laplacian(const AffinityGraph& graph) {
  const SparseMatrix& w = graph.weights();
  const Eigen::Index n = w.rows();
  Eigen::VectorXd degrees = Eigen::VectorXd::Zero(n);
  for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(w, col); it; ++it) degrees(it.row()) += it.value();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(degrees(i) > 0.0)) throw InvalidArgument("vertex " + std::to_string(i) + " is isolated (zero degree)");
  }
  const Eigen::VectorXd inv_sqrt = degrees.cwiseSqrt().cwiseInverse();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(w.nonZeros() + n));
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
  for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(w, col); it; ++it) {
      triplets.emplace_back(it.row(), it.col(), -inv_sqrt(it.row()) * it.value() * inv_sqrt(it.col()));
    }
  }
  SparseMatrix l(n, n);
  l.setFromTriplets(triplets.begin(), triplets.end());
  SparseMatrix lt = l.transpose();
  SparseMatrix sym = 0.5 * (l + lt);
  sym.makeCompressed();
  return Laplacian(std::move(sym), std::move(degrees));
}

void write_weights_csv(const AffinityGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  const SparseMatrix& w = graph.weights();
  for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(w, col); it; ++it) {
      out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace fmapdiag
