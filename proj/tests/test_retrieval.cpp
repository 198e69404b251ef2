#include <doctest.h>

#include <cmath>

#include "fmapdiag/error.hpp"
#include "fmapdiag/retrieval.hpp"
#include "oracles.hpp"

using namespace fmapdiag;

namespace {

const std::vector<int> kCutoffs{1, 5, 10};

SpectralBasis random_basis(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(oracle::gaussian_matrix(n, k, seed)).householderQ() *
                            Eigen::MatrixXd::Identity(n, k);
  Eigen::VectorXd values = Eigen::VectorXd::LinSpaced(k, 0.1, 1.0);
  return SpectralBasis(q, values);
}

}  // namespace

TEST_CASE("spectral scores") {
  const auto basis = random_basis(50, 8, 1);
  SUBCASE("identity map puts zero on the diagonal and it is each row's maximum") {
    const auto s = spectral_scores(FunctionalMap::identity(8), basis, basis).scores();
    for (Eigen::Index i = 0; i < 50; ++i) {
      CHECK(std::abs(s(i, i)) < 1e-15);
      CHECK(s.row(i).maxCoeff() == s(i, i));
    }
  }
  SUBCASE("expansion equals direct pairwise distances") {
    const FunctionalMap c(oracle::gaussian_matrix(8, 8, 2));
    const auto s = spectral_scores(c, basis, basis).scores();
    const Eigen::MatrixXd mapped = basis.vectors() * c.matrix().transpose();
    for (Eigen::Index i = 0; i < 50; ++i) {
      for (Eigen::Index j = 0; j < 50; ++j) {
        CHECK(std::abs(s(i, j) + (mapped.row(i) - basis.vectors().row(j)).squaredNorm()) < 1e-9);
      }
    }
  }
  SUBCASE("single target point") {
    Eigen::MatrixXd one(1, 2);
    one << 0.3, -0.4;
    const SpectralBasis target(one, Eigen::Vector2d(0.1, 0.2));
    const SpectralBasis source(Eigen::MatrixXd::Identity(3, 2), Eigen::Vector2d(0.1, 0.2));
    const auto s = spectral_scores(FunctionalMap::identity(2), source, target).scores();
    CHECK(s.cols() == 1);
    CHECK(s(0, 0) == doctest::Approx(-((Eigen::Vector2d(1, 0) - Eigen::Vector2d(0.3, -0.4)).squaredNorm())));
  }
}

TEST_CASE("recall on constructed matrices") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(20, 20);
  const auto perfect = recall_at_k(ScoreMatrix(eye, Direction::i2t), kCutoffs);
  for (int k : kCutoffs) CHECK(perfect.at(Direction::i2t, k) == 100.0);

  Eigen::MatrixXd adversarial = Eigen::MatrixXd::Ones(20, 20);
  for (Eigen::Index i = 0; i < 20; ++i) adversarial(i, i) = 0.0;
  const auto worst = recall_at_k(ScoreMatrix(adversarial, Direction::i2t), std::vector<int>{1, 5, 19, 20});
  for (int k : {1, 5, 19}) CHECK(worst.at(Direction::i2t, k) == 0.0);
  CHECK(worst.at(Direction::i2t, 20) == 100.0);

  CHECK_THROWS_AS(recall_at_k(ScoreMatrix(eye, Direction::i2t), std::vector<int>{21}), InvalidArgument);
  CHECK_THROWS_AS(recall_at_k(ScoreMatrix(eye, Direction::i2t), std::vector<int>{0}), InvalidArgument);
}

TEST_CASE("ties resolve toward the lower index") {
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(4, 4);
  const auto ranks = true_match_ranks(ScoreMatrix(flat, Direction::i2t));
  CHECK(ranks == std::vector<Eigen::Index>{0, 1, 2, 3});
  CHECK(ranks == oracle::ranks_by_sorting(flat));
}

TEST_CASE("ranks agree with a sorting implementation on random and quantized scores") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Eigen::MatrixXd s = oracle::gaussian_matrix(60, 60, seed);
    if (seed % 2) s = (s * 2.0).array().round();  // many ties
    CHECK(true_match_ranks(ScoreMatrix(s, Direction::i2t)) == oracle::ranks_by_sorting(s));
  }
}

TEST_CASE("t2i ranks the transposed similarities") {
  const Eigen::MatrixXd s = oracle::gaussian_matrix(40, 40, 5);
  const auto both = bidirectional_recall(ScoreMatrix(s, Direction::i2t), kCutoffs);
  for (int k : kCutoffs) {
    CHECK(both.at(Direction::i2t, k) == oracle::recall_by_sorting(s, k));
    CHECK(both.at(Direction::t2i, k) == oracle::recall_by_sorting(s.transpose(), k));
  }
  CHECK(ScoreMatrix(s, Direction::i2t).transposed().direction() == Direction::t2i);
}

TEST_CASE("caption-space conversion") {
  RecallTable image(Protocol::image_space);
  for (auto d : {Direction::i2t, Direction::t2i}) {
    image.set(d, 1, 10.0);
    image.set(d, 2, 15.0);
    image.set(d, 5, 30.0);
    image.set(d, 10, 40.0);
  }
  CHECK(required_image_cutoffs(kCutoffs, 5) == std::vector<int>{1, 2, 5, 10});
  const auto caption = caption_space_recall(image, 5, kCutoffs);
  CHECK(caption.protocol() == Protocol::caption_space);
  CHECK(caption.at(Direction::i2t, 1) == 10.0);
  CHECK(caption.at(Direction::i2t, 5) == 10.0);
  CHECK(caption.at(Direction::i2t, 10) == 15.0);
  CHECK(caption.at(Direction::t2i, 10) == 40.0);
  CHECK_NOTHROW(check_caption_protocol(caption, 5));

  const auto same = caption_space_recall(image, 1, kCutoffs);
  for (auto d : {Direction::i2t, Direction::t2i}) {
    for (int k : kCutoffs) CHECK(same.at(d, k) == image.at(d, k));
  }

  RecallTable broken(Protocol::caption_space);
  broken.set(Direction::i2t, 1, 1.0);
  broken.set(Direction::i2t, 5, 2.0);
  CHECK_THROWS_AS(check_caption_protocol(broken, 5), Error);
  CHECK_THROWS_AS(caption_space_recall(caption, 5, kCutoffs), InvalidArgument);
}

TEST_CASE("recall table bookkeeping") {
  RecallTable t;
  t.set(Direction::i2t, 1, 3.0);
  t.set(Direction::i2t, 1, 4.0);
  CHECK(t.entries().size() == 1);
  CHECK(t.at(Direction::i2t, 1) == 4.0);
  CHECK_THROWS_AS(t.at(Direction::t2i, 1), InvalidArgument);
  RecallTable other;
  other.set(Direction::t2i, 5, 7.0);
  t.merge(other);
  CHECK(t.contains(Direction::t2i, 5));
  CHECK_THROWS_AS(t.merge(RecallTable(Protocol::caption_space)), InvalidArgument);
  CHECK(direction_from_string(to_string(Direction::t2i)) == Direction::t2i);
  CHECK(protocol_from_string(to_string(Protocol::caption_space)) == Protocol::caption_space);
}
