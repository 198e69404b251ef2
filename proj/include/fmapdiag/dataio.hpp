#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fmapdiag {

/// N x d matrix of encoder outputs for one modality. Row i of every
/// modality's matrix describes the same underlying sample.
///
/// Immutable after construction; the constructor rejects N < 2, d < 1 and
/// any non-finite entry.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(Eigen::MatrixXd data, std::string modality_tag = {});

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  Eigen::Index n_points() const noexcept { return data_.rows(); }
  Eigen::Index dim() const noexcept { return data_.cols(); }
  const std::string& modality_tag() const noexcept { return tag_; }

  /// First `d` coordinates of every row.
  EmbeddingMatrix truncated(Eigen::Index d) const;

 private:
  Eigen::MatrixXd data_;
  std::string tag_;
};

enum class EmbeddingFormat { binary, csv };

/// Picks csv for a ".csv" extension, binary otherwise.
EmbeddingFormat format_from_path(const std::filesystem::path& path);

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);

/// Writes the "EMB1" little-endian f32 format. Entries are narrowed to f32.
void save_embeddings(const EmbeddingMatrix& z, const std::filesystem::path& path);

/// Writes any real matrix in the binary embedding layout (used for basis
/// and functional-map dumps, which may have a single row).
void save_matrix_binary(const Eigen::MatrixXd& m, const std::filesystem::path& path);
Eigen::MatrixXd load_matrix_binary(const std::filesystem::path& path);

void save_embeddings_csv(const EmbeddingMatrix& z, const std::filesystem::path& path);

struct AnchorPair {
  Eigen::Index source = 0;
  Eigen::Index target = 0;
  friend bool operator==(const AnchorPair&, const AnchorPair&) = default;
};

/// Known cross-modal correspondences. Indices are in range and neither
/// side contains duplicates.
class AnchorSet {
 public:
  AnchorSet() = default;
  AnchorSet(std::vector<AnchorPair> pairs, Eigen::Index n_points, std::uint64_t seed = 0);

  const std::vector<AnchorPair>& pairs() const noexcept { return pairs_; }
  std::size_t budget() const noexcept { return pairs_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  bool empty() const noexcept { return pairs_.empty(); }

  std::vector<Eigen::Index> source_indices() const;
  std::vector<Eigen::Index> target_indices() const;

 private:
  std::vector<AnchorPair> pairs_;
  std::uint64_t seed_ = 0;
};

/// `budget` distinct indices drawn uniformly without replacement, paired
/// with themselves. Pure function of its arguments.
AnchorSet sample_anchors(Eigen::Index n_points, std::size_t budget, std::uint64_t seed);

/// Reads "src,dst" lines.
AnchorSet load_anchor_set(const std::filesystem::path& path, Eigen::Index n_points);

enum class TruncationMode { first_coordinates, pca };

struct PipelineConfig {
  int knn_k = 15;
  int spectral_dim = 50;
  int zoomout_start = 50;
  int zoomout_max = 100;
  int zoomout_steps = 5;
  bool zoomout = true;
  double lambda_comm = 0.1;
  double lambda_tik = 0.001;
  double probe_smoothing = 0.1;
  int hks_num_scales = 100;
  std::vector<int> recall_cutoffs{1, 5, 10};
  int captions_per_image = 5;
  double cca_ridge = 1e-3;
  bool procrustes_center = false;
  TruncationMode truncation = TruncationMode::first_coordinates;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when an invariant fails for `n_points`.
  void validate(Eigen::Index n_points) const;
};

}  // namespace fmapdiag
