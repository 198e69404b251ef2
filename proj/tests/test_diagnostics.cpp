#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fmapdiag/diagnostics.hpp"
#include "fmapdiag/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fmapdiag;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double spectral_distance_loops(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double ma = 0, mb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    ma = std::max(ma, a(i));
    mb = std::max(mb, b(i));
  }
  double s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += std::pow(a(i) / ma - b(i) / mb, 2);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("spectral distance") {
  const auto a = vec({0.03, 0.1, 0.4, 0.66});
  CHECK(spectral_distance(a, a) == 0.0);
  CHECK(spectral_distance(a, 3.7 * a) < 1e-15);
  // (1,2) vs (1,4): normalized (0.5,1) vs (0.25,1), RMS = 0.25 / sqrt(2).
  CHECK(spectral_distance(vec({1, 2}), vec({1, 4})) == doctest::Approx(0.17677669529663687).epsilon(1e-15));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::VectorXd x = oracle::gaussian_matrix(20, 1, seed).cwiseAbs().col(0).array() + 0.01;
    const Eigen::VectorXd y = oracle::gaussian_matrix(20, 1, seed + 50).cwiseAbs().col(0).array() + 0.01;
    const double d = spectral_distance(x, y);
    CHECK(d == doctest::Approx(spectral_distance_loops(x, y)).epsilon(1e-13));
    CHECK(d == spectral_distance(y, x));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
  CHECK_THROWS_AS(spectral_distance(vec({1, 2}), vec({1, 2, 3})), InvalidArgument);
}

TEST_CASE("diagonal dominance") {
  const auto identity = diagonal_dominance(FunctionalMap::identity(6));
  CHECK(identity.mean == 1.0);
  CHECK(identity.per_index.minCoeff() == 1.0);

  Eigen::MatrixXd cyclic = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) cyclic(i, (i + 1) % 5) = 1.0;
  const auto shifted = diagonal_dominance(FunctionalMap(cyclic));
  CHECK(shifted.per_index.cwiseAbs().maxCoeff() == 0.0);
  CHECK(shifted.mean == 0.0);

  Eigen::MatrixXd c(2, 2);
  c << 3, 4, 0, 0;
  testutil::WarningCapture warnings;
  const auto with_zero = diagonal_dominance(FunctionalMap(c));
  CHECK(with_zero.per_index(0) == doctest::Approx(9.0 / 25.0));
  CHECK(with_zero.per_index(1) == 0.0);
  CHECK(with_zero.zero_rows == std::vector<Eigen::Index>{1});
  CHECK(warnings.messages.size() == 1);

  const auto random = diagonal_dominance(FunctionalMap(oracle::gaussian_matrix(30, 30, 3)));
  CHECK(random.per_index.minCoeff() >= 0.0);
  CHECK(random.per_index.maxCoeff() <= 1.0);
}

TEST_CASE("orthogonality error") {
  const double t = std::numbers::pi / 6.0;
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  CHECK(orthogonality_error(FunctionalMap(rot)) < 1e-12);
  const double doubled = orthogonality_error(FunctionalMap(2.0 * Eigen::MatrixXd::Identity(50, 50)));
  CHECK(doubled == doctest::Approx(3.0 * std::sqrt(50.0) / 50.0).epsilon(1e-14));
  CHECK(doubled == doctest::Approx(0.4243).epsilon(1e-4));
}

TEST_CASE("commutativity error") {
  const auto ls = vec({0.1, 0.2, 0.5});
  const auto lt = vec({0.15, 0.2, 0.45});
  CHECK(commutativity_error(FunctionalMap::identity(3), ls, ls) == 0.0);
  CHECK(commutativity_error(FunctionalMap::identity(3), ls, lt) == doctest::Approx((ls - lt).norm()));
  const Eigen::MatrixXd c = oracle::gaussian_matrix(3, 3, 9);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s += c(i, j) * c(i, j) * std::pow(ls(j) - lt(i), 2);
  }
  CHECK(commutativity_error(FunctionalMap(c), ls, lt) == doctest::Approx(std::sqrt(s)).epsilon(1e-13));
}

TEST_CASE("degenerate indices") {
  const auto ls = vec({0.1, 0.1 + 1e-10, 0.3, 0.4});
  const auto lt = vec({0.1, 0.2, 0.3, 0.3 + 1e-9});
  CHECK(degenerate_indices(ls, lt) == std::vector<Eigen::Index>{0, 1, 2, 3});
  CHECK(degenerate_indices(vec({0.1, 0.2}), vec({0.1, 0.2})).empty());
}

TEST_CASE("full report and threshold profile") {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(6, 4);
  const SpectralBasis basis(phi, vec({0.1, 0.2, 0.3, 0.4}));
  const auto report = diagnose(FunctionalMap::identity(4), basis, basis);
  CHECK(report.spectral_distance == 0.0);
  CHECK(report.diag_dominance_mean == 1.0);
  CHECK(report.orthogonality_error == 0.0);
  CHECK(report.commutativity_error == 0.0);
  CHECK(report.source_eigenvalue_range == std::pair{0.1, 0.4});
  CHECK(kShapeMatchingProfile.passes(report));

  auto worse = report;
  worse.diag_dominance_mean = 0.5;
  CHECK_FALSE(kShapeMatchingProfile.passes(worse));
  CHECK_THROWS_AS(diagnose(FunctionalMap(Eigen::MatrixXd::Identity(3, 4)), basis, basis), InvalidArgument);
}
