#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmapdiag/dataio.hpp"

namespace fmapdiag {

enum class CloudShape { gaussian_mixture, swiss_roll };

struct CloudStructure {
  CloudShape shape = CloudShape::gaussian_mixture;
  int components = 3;        ///< mixture components
  double component_sd = 1.0; ///< per-coordinate standard deviation of each component
  double centre_distance = 4.0;  ///< typical distance between mixture centres, in component_sd units
  double roll_height = 21.0;     ///< width of the swiss roll along its flat axis
};

/// A generated point cloud and the generator state needed to redraw it.
struct BaseCloud {
  EmbeddingMatrix points;
  CloudStructure structure;
  std::vector<int> labels;  ///< mixture component (or roll segment) per row
  std::uint64_t seed = 0;
};

/// N x d synthetic cloud, deterministic in `seed`. Mixture components are
/// contiguous, near-equal blocks of rows whose centres sit about
/// centre_distance apart (never closer than half of it), so the components
/// overlap and the kNN graph stays connected. The swiss roll occupies the
/// first three coordinates (d >= 3). Requires N >= 2 * knn_k.
BaseCloud gen_base_cloud(Eigen::Index n, Eigen::Index d, const CloudStructure& structure, std::uint64_t seed,
                         int knn_k = 15);

enum class PairRelation { identical, isometric, isometric_noisy, unaligned };

std::string to_string(PairRelation r);
PairRelation relation_from_string(const std::string& s);

struct SyntheticPair {
  EmbeddingMatrix a;
  EmbeddingMatrix b;
  PairRelation relation;
  std::optional<Eigen::MatrixXd> planted_transform;  ///< Q with b = a Q (+ noise)
  std::uint64_t seed = 0;
};

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// diagonal of R made positive.
Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::uint64_t seed);

/// Derives a second modality from `base`. Noise for isometric_noisy is
/// i.i.d. Gaussian with standard deviation noise_scale * (mean row norm).
/// `unaligned` redraws the cloud with the same structure and labels from a
/// fresh seed.
SyntheticPair gen_pair(const BaseCloud& base, PairRelation relation, double noise_scale, std::uint64_t seed);

/// Writes `<dir>/a.emb` and `<dir>/b.emb` in the binary embedding format.
void save_pair(const SyntheticPair& pair, const std::filesystem::path& dir);

}  // namespace fmapdiag
