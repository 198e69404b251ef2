#include "fmapdiag/synthgen.hpp"

#include <cmath>
#include <numbers>

#include "fmapdiag/error.hpp"
#include "fmapdiag/rng.hpp"

namespace fmapdiag {
namespace {

std::vector<int> block_labels(Eigen::Index n, int blocks) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i * blocks / n);
  return labels;
}

Eigen::MatrixXd draw_mixture(Eigen::Index d, const CloudStructure& s, const std::vector<int>& labels, Rng& rng) {
  const double sd = s.component_sd;
  const double min_sep = 0.5 * s.centre_distance * sd;
  // Gaussian centres: E|c_a - c_b|^2 = 2 d scale^2.
  const double scale = s.centre_distance * sd / std::sqrt(2.0 * static_cast<double>(d));
  Eigen::MatrixXd centres(s.components, d);
  for (int c = 0; c < s.components; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      for (Eigen::Index j = 0; j < d; ++j) centres(c, j) = scale * rng.normal();
      placed = true;
      for (int prev = 0; prev < c && placed; ++prev) placed = (centres.row(c) - centres.row(prev)).norm() >= min_sep;
    }
    if (!placed) {
      throw InvalidArgument("cannot place " + std::to_string(s.components) + " separated mixture centres in d=" +
                            std::to_string(d));
    }
  }
  Eigen::MatrixXd points(static_cast<Eigen::Index>(labels.size()), d);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) points(i, j) = centres(labels[static_cast<std::size_t>(i)], j) + sd * rng.normal();
  }
  return points;
}

Eigen::MatrixXd draw_swiss_roll(Eigen::Index d, const CloudStructure& s, const std::vector<int>& labels, Rng& rng) {
  Eigen::MatrixXd points = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), d);
  const double t_min = 1.5 * std::numbers::pi;
  const double t_span = 3.0 * std::numbers::pi;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double segment = labels[static_cast<std::size_t>(i)];
    const double t = t_min + t_span * (segment + rng.uniform()) / s.components;
    const double height = s.roll_height * rng.uniform();
    points(i, 0) = t * std::cos(t);
    points(i, 1) = height;
    points(i, 2) = t * std::sin(t);
  }
  return points;
}

Eigen::MatrixXd draw_cloud(Eigen::Index d, const CloudStructure& s, const std::vector<int>& labels, std::uint64_t seed) {
  Rng rng(seed);
  return s.shape == CloudShape::gaussian_mixture ? draw_mixture(d, s, labels, rng) : draw_swiss_roll(d, s, labels, rng);
}

}  // namespace

BaseCloud gen_base_cloud(Eigen::Index n, Eigen::Index d, const CloudStructure& structure, std::uint64_t seed,
                         int knn_k) {
  if (n < 2 * static_cast<Eigen::Index>(knn_k)) {
    throw InvalidArgument("synthetic cloud needs N >= 2*knn_k (N=" + std::to_string(n) +
                          ", knn_k=" + std::to_string(knn_k) + ")");
  }
  if (d < 1) throw InvalidArgument("synthetic cloud needs d >= 1");
  if (structure.components < 1 || structure.components > n) {
    throw InvalidArgument("synthetic cloud needs 1 <= components <= N");
  }
  if (!(structure.component_sd > 0.0)) throw InvalidArgument("component_sd must be positive");
  if (!(structure.centre_distance >= 0.0)) throw InvalidArgument("centre_distance must be nonnegative");
  if (!(structure.roll_height >= 0.0)) throw InvalidArgument("roll_height must be nonnegative");
  if (structure.shape == CloudShape::swiss_roll && d < 3) throw InvalidArgument("swiss roll needs d >= 3");

  auto labels = block_labels(n, structure.components);
  Eigen::MatrixXd points = draw_cloud(d, structure, labels, seed);
  return {EmbeddingMatrix(std::move(points), "synthetic"), structure, std::move(labels), seed};
}

std::string to_string(PairRelation r) {
  switch (r) {
    case PairRelation::identical: return "identical";
    case PairRelation::isometric: return "isometric";
    case PairRelation::isometric_noisy: return "isometric_noisy";
    case PairRelation::unaligned: return "unaligned";
  }
  return "unknown";
}

PairRelation relation_from_string(const std::string& s) {
  if (s == "identical") return PairRelation::identical;
  if (s == "isometric") return PairRelation::isometric;
  if (s == "isometric_noisy") return PairRelation::isometric_noisy;
  if (s == "unaligned") return PairRelation::unaligned;
  throw InvalidArgument("unknown pair relation '" + s + "'");
}

Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

SyntheticPair gen_pair(const BaseCloud& base, PairRelation relation, double noise_scale, std::uint64_t seed) {
  if (!(noise_scale >= 0.0)) throw InvalidArgument("noise scale must be nonnegative");
  const Eigen::MatrixXd& a = base.points.data();
  const Eigen::Index d = a.cols();
  SyntheticPair pair{base.points, base.points, relation, std::nullopt, seed};
  switch (relation) {
    case PairRelation::identical:
      break;
    case PairRelation::isometric:
    case PairRelation::isometric_noisy: {
      Eigen::MatrixXd q = random_orthogonal(d, seed);
      Eigen::MatrixXd b = a * q;
      if (relation == PairRelation::isometric_noisy) {
        const double sd = noise_scale * a.rowwise().norm().mean();
        Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
        for (Eigen::Index i = 0; i < b.rows(); ++i) {
          for (Eigen::Index j = 0; j < d; ++j) b(i, j) += sd * rng.normal();
        }
      }
      pair.b = EmbeddingMatrix(std::move(b), "synthetic_b");
      pair.planted_transform = std::move(q);
      break;
    }
    case PairRelation::unaligned: {
      std::uint64_t fresh = seed;
      if (fresh == base.seed) fresh ^= 0xd1b54a32d192ed03ull;
      pair.b = EmbeddingMatrix(draw_cloud(d, base.structure, base.labels, fresh), "synthetic_b");
      break;
    }
  }
  return pair;
}

void save_pair(const SyntheticPair& pair, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_embeddings(pair.a, dir / "a.emb");
  save_embeddings(pair.b, dir / "b.emb");
}

}  // namespace fmapdiag
