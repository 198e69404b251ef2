#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmapdiag/functional_map.hpp"
#include "fmapdiag/spectral_basis.hpp"

namespace fmapdiag {

enum class Direction { i2t, t2i };
enum class Protocol { image_space, caption_space };

std::string to_string(Direction d);
std::string to_string(Protocol p);
Direction direction_from_string(const std::string& s);
Protocol protocol_from_string(const std::string& s);

/// Query x target similarities, larger is more similar. Query i's true
/// match is target i.
class ScoreMatrix {
 public:
  ScoreMatrix(Eigen::MatrixXd scores, Direction direction);

  const Eigen::MatrixXd& scores() const noexcept { return scores_; }
  Direction direction() const noexcept { return direction_; }

  /// Same similarities viewed from the other modality.
  ScoreMatrix transposed() const;

 private:
  Eigen::MatrixXd scores_;
  Direction direction_;
};

/// -|| C phi_src(i) - phi_tgt(j) ||^2 via the expansion
/// -(|a_i|^2 + |b_j|^2 - 2 a_i.b_j). Source-to-target is i2t.
ScoreMatrix spectral_scores(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target);

struct RecallEntry {
  Direction direction = Direction::i2t;
  int k = 1;
  double recall = 0.0;  ///< percentage in [0, 100]
};

class RecallTable {
 public:
  explicit RecallTable(Protocol protocol = Protocol::image_space) : protocol_(protocol) {}

  Protocol protocol() const noexcept { return protocol_; }
  const std::vector<RecallEntry>& entries() const noexcept { return entries_; }

  /// Adds or replaces the entry for (direction, k).
  void set(Direction direction, int k, double recall);
  bool contains(Direction direction, int k) const;
  /// Throws InvalidArgument when absent.
  double at(Direction direction, int k) const;

  /// Entries of `other` added to this table (protocols must match).
  void merge(const RecallTable& other);

 private:
  Protocol protocol_;
  std::vector<RecallEntry> entries_;
};

/// Zero-based rank of each query's true match, ties resolved toward the
/// lower target index.
std::vector<Eigen::Index> true_match_ranks(const ScoreMatrix& scores);

/// Image-space Recall@K for the matrix's direction.
RecallTable recall_at_k(const ScoreMatrix& scores, std::span<const int> ks);

/// Both directions from one i2t score matrix; t2i ranks the same
/// similarities column-wise.
RecallTable bidirectional_recall(const ScoreMatrix& i2t, std::span<const int> ks);

/// Cutoffs an image-space table needs so caption_space_recall can produce
/// `ks`: the union of ks and ceil(K / captions_per_image).
std::vector<int> required_image_cutoffs(std::span<const int> ks, int captions_per_image);

/// With every caption of an image sharing its score, caption-space i2t
/// R@K equals image-space R@ceil(K / c); t2i is unchanged.
RecallTable caption_space_recall(const RecallTable& image_table, int captions_per_image, std::span<const int> ks);

/// Throws Error if a caption-space table with >= 5 captions per image
/// reports different i2t R@1 and R@5.
void check_caption_protocol(const RecallTable& table, int captions_per_image);

}  // namespace fmapdiag
