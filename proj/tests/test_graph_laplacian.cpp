#include <doctest.h>

#include <cmath>

#include "fmapdiag/error.hpp"
#include "fmapdiag/graph_laplacian.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fmapdiag;

namespace {

SparseMatrix sparse_from(const Eigen::MatrixXd& m) { return m.sparseView(); }

EmbeddingMatrix random_cloud(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  return EmbeddingMatrix(oracle::gaussian_matrix(n, d, seed));
}

}  // namespace

TEST_CASE("unit square corners with k = 1") {
  Eigen::MatrixXd z(4, 2);
  z << 0, 0, 1, 0, 0, 1, 1, 1;
  const auto g = knn_graph(EmbeddingMatrix(z), 1);
  CHECK(g.bandwidth() == doctest::Approx(1.0).epsilon(1e-15));
  const Eigen::MatrixXd w = g.weights();
  // Ties go to the lower index: 0->1, 1->0, 2->0, 3->1.
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}}) {
    expected(i, j) = std::exp(-1.0);
    expected(j, i) = std::exp(-1.0);
  }
  CHECK((w - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::exp(-1.0) == doctest::Approx(0.3679).epsilon(1e-4));
}

TEST_CASE("kNN graph matches the dense loop construction") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto z = random_cloud(60, 4, seed);
    const Eigen::MatrixXd w = knn_graph(z, 7).weights();
    CHECK((w - oracle::knn_affinity(z.data(), 7)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("kNN graph invariants") {
  const int k = 5;
  const auto z = random_cloud(80, 3, 11);
  const auto g = knn_graph(z, k);
  const Eigen::MatrixXd w = g.weights();
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    int nonzeros = 0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (w(i, j) != 0.0) {
        ++nonzeros;
        CHECK(w(i, j) > 0.0);
        CHECK(w(i, j) <= 1.0);
      }
    }
    CHECK(nonzeros >= k);
  }
}

TEST_CASE("k = N - 1 saturates to the complete graph") {
  const auto z = random_cloud(12, 2, 5);
  const Eigen::MatrixXd w = knn_graph(z, 11).weights();
  for (Eigen::Index i = 0; i < 12; ++i) {
    for (Eigen::Index j = 0; j < 12; ++j) CHECK((w(i, j) > 0.0) == (i != j));
  }
}

TEST_CASE("degenerate inputs") {
  Eigen::MatrixXd twin(2, 2);
  twin << 1, 2, 1, 2;
  CHECK_THROWS_WITH_AS(knn_graph(EmbeddingMatrix(twin), 1), doctest::Contains("bandwidth"), InvalidArgument);
  CHECK_THROWS_AS(knn_graph(random_cloud(5, 2, 1), 5), InvalidArgument);
  CHECK_THROWS_AS(knn_graph(random_cloud(5, 2, 1), 0), InvalidArgument);
}

TEST_CASE("disconnected graph only warns") {
  Eigen::MatrixXd z(6, 1);
  z << 0, 0.1, 0.2, 100, 100.1, 100.2;
  testutil::WarningCapture warnings;
  const auto g = knn_graph(EmbeddingMatrix(z), 2);
  CHECK(g.component_count() == 2);
  REQUIRE(warnings.messages.size() == 1);
  CHECK(warnings.messages[0].find("2 connected components") != std::string::npos);
}

TEST_CASE("affinity graph validation") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 1) = 0.5;
  CHECK_THROWS_AS(AffinityGraph(sparse_from(w), 1.0, 1), InvalidArgument);  // asymmetric
  w(1, 0) = 0.5;
  w(2, 2) = 0.5;
  CHECK_THROWS_AS(AffinityGraph(sparse_from(w), 1.0, 1), InvalidArgument);  // self loop
  w(2, 2) = 0.0;
  w(0, 1) = w(1, 0) = 1.5;
  CHECK_THROWS_AS(AffinityGraph(sparse_from(w), 1.0, 1), InvalidArgument);  // weight above 1
}

TEST_CASE("two-node Laplacian") {
  const double weight = 0.3;
  Eigen::MatrixXd w(2, 2);
  w << 0, weight, weight, 0;
  const auto lap = normalized_laplacian(AffinityGraph(sparse_from(w), 1.0, 1));
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK((Eigen::MatrixXd(lap.matrix()) - expected).cwiseAbs().maxCoeff() < 1e-15);
  const auto eig = oracle::dense_eigen(Eigen::MatrixXd(lap.matrix()));
  CHECK(eig.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eig.eigenvalues()(1) == doctest::Approx(2.0));
}

TEST_CASE("path graph spectrum against the dense oracle") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 3; ++i) w(i, i + 1) = w(i + 1, i) = 1.0;
  const auto lap = normalized_laplacian(AffinityGraph(sparse_from(w), 1.0, 1));
  const Eigen::MatrixXd reference = oracle::normalized_laplacian(w);
  CHECK((Eigen::MatrixXd(lap.matrix()) - reference).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::VectorXd values = oracle::dense_eigen(Eigen::MatrixXd(lap.matrix())).eigenvalues();
  CHECK(std::abs(values(0)) < 1e-12);
  CHECK(values.minCoeff() >= -1e-12);
  CHECK(values.maxCoeff() <= 2.0 + 1e-12);
  // Normalized path Laplacian P4: 1 - cos(pi m / 3).
  for (int m = 0; m < 4; ++m) CHECK(values(m) == doctest::Approx(1.0 - std::cos(std::numbers::pi * m / 3.0)));
}

TEST_CASE("Laplacian of a random kNN graph is symmetric with spectrum in [0, 2]") {
  const auto lap = normalized_laplacian(knn_graph(random_cloud(100, 5, 2), 10));
  const Eigen::MatrixXd l = lap.matrix();
  CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd values = oracle::dense_eigen(l).eigenvalues();
  CHECK(std::abs(values(0)) < 1e-10);
  CHECK(values.maxCoeff() <= 2.0 + 1e-10);
}

TEST_CASE("isolated vertex is an error") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  CHECK_THROWS_WITH_AS(normalized_laplacian(AffinityGraph(sparse_from(w), 1.0, 1)), doctest::Contains("2"),
                       InvalidArgument);
}
