#include "fmapdiag/retrieval.hpp"

#include <algorithm>
#include <set>

#include "fmapdiag/error.hpp"

namespace fmapdiag {

std::string to_string(Direction d) { return d == Direction::i2t ? "i2t" : "t2i"; }

std::string to_string(Protocol p) { return p == Protocol::image_space ? "image_space" : "caption_space"; }

Direction direction_from_string(const std::string& s) {
  if (s == "i2t") return Direction::i2t;
  if (s == "t2i") return Direction::t2i;
  throw InvalidArgument("unknown retrieval direction '" + s + "'");
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "image_space") return Protocol::image_space;
  if (s == "caption_space") return Protocol::caption_space;
  throw InvalidArgument("unknown recall protocol '" + s + "'");
}

ScoreMatrix::ScoreMatrix(Eigen::MatrixXd scores, Direction direction)
    : scores_(std::move(scores)), direction_(direction) {
  if (!scores_.allFinite()) throw NumericalError("score matrix has non-finite entries");
}

ScoreMatrix ScoreMatrix::transposed() const {
  return ScoreMatrix(scores_.transpose(), direction_ == Direction::i2t ? Direction::t2i : Direction::i2t);
}

ScoreMatrix spectral_scores(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target) {
  if (map.source_dim() > source.dim() || map.target_dim() > target.dim()) {
    throw InvalidArgument("functional map is larger than the supplied bases");
  }
  const Eigen::MatrixXd a = source.vectors().leftCols(map.source_dim()) * map.matrix().transpose();
  const auto b = target.vectors().leftCols(map.target_dim());
  const Eigen::VectorXd a_norms = a.rowwise().squaredNorm();
  const Eigen::VectorXd b_norms = b.rowwise().squaredNorm();
  Eigen::MatrixXd scores = 2.0 * a * b.transpose();
  scores.colwise() -= a_norms;
  scores.rowwise() -= b_norms.transpose();
  return ScoreMatrix(std::move(scores), Direction::i2t);
}

void RecallTable::set(Direction direction, int k, double recall) {
  for (auto& e : entries_) {
    if (e.direction == direction && e.k == k) {
      e.recall = recall;
      return;
    }
  }
  entries_.push_back({direction, k, recall});
}

bool RecallTable::contains(Direction direction, int k) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const RecallEntry& e) { return e.direction == direction && e.k == k; });
}

double RecallTable::at(Direction direction, int k) const {
  for (const auto& e : entries_) {
    if (e.direction == direction && e.k == k) return e.recall;
  }
  throw InvalidArgument("recall table has no " + to_string(direction) + " R@" + std::to_string(k));
}

void RecallTable::merge(const RecallTable& other) {
  if (other.protocol_ != protocol_) throw InvalidArgument("cannot merge recall tables of different protocols");
  for (const auto& e : other.entries_) set(e.direction, e.k, e.recall);
}

std::vector<Eigen::Index> true_match_ranks(const ScoreMatrix& scores) {
  const Eigen::MatrixXd& s = scores.scores();
  if (s.rows() != s.cols()) throw InvalidArgument("image-space recall needs a square score matrix");
  std::vector<Eigen::Index> ranks(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double truth = s(i, i);
    Eigen::Index ahead = 0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (s(i, j) > truth || (j < i && s(i, j) == truth)) ++ahead;
    }
    ranks[static_cast<std::size_t>(i)] = ahead;
  }
  return ranks;
}

RecallTable recall_at_k(const ScoreMatrix& scores, std::span<const int> ks) {
  const Eigen::Index n_tgt = scores.scores().cols();
  for (int k : ks) {
    if (k < 1 || k > n_tgt) {
      throw InvalidArgument("recall cutoff K=" + std::to_string(k) + " outside [1, " + std::to_string(n_tgt) + "]");
    }
  }
  const auto ranks = true_match_ranks(scores);
  RecallTable table(Protocol::image_space);
  for (int k : ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](Eigen::Index r) { return r < k; });
    table.set(scores.direction(), k, 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size()));
  }
  return table;
}

RecallTable bidirectional_recall(const ScoreMatrix& i2t, std::span<const int> ks) {
  if (i2t.direction() != Direction::i2t) throw InvalidArgument("bidirectional_recall expects i2t scores");
  RecallTable table = recall_at_k(i2t, ks);
  table.merge(recall_at_k(i2t.transposed(), ks));
  return table;
}

std::vector<int> required_image_cutoffs(std::span<const int> ks, int captions_per_image) {
  if (captions_per_image < 1) throw InvalidArgument("captions_per_image must be >= 1");
  std::set<int> out(ks.begin(), ks.end());
  for (int k : ks) out.insert((k + captions_per_image - 1) / captions_per_image);
  return {out.begin(), out.end()};
}

RecallTable caption_space_recall(const RecallTable& image_table, int captions_per_image, std::span<const int> ks) {
  if (captions_per_image < 1) throw InvalidArgument("captions_per_image must be >= 1");
  if (image_table.protocol() != Protocol::image_space) throw InvalidArgument("expected an image-space recall table");
  RecallTable out(Protocol::caption_space);
  for (int k : ks) {
    const int image_k = (k + captions_per_image - 1) / captions_per_image;
    if (!image_table.contains(Direction::i2t, image_k)) {
      throw InvalidArgument("image-space table lacks i2t R@" + std::to_string(image_k) +
                            " needed for caption-space R@" + std::to_string(k));
    }
    out.set(Direction::i2t, k, image_table.at(Direction::i2t, image_k));
    if (image_table.contains(Direction::t2i, k)) out.set(Direction::t2i, k, image_table.at(Direction::t2i, k));
  }
  return out;
}

void check_caption_protocol(const RecallTable& table, int captions_per_image) {
  if (table.protocol() != Protocol::caption_space || captions_per_image < 5) return;
  if (table.contains(Direction::i2t, 1) && table.contains(Direction::i2t, 5) &&
      table.at(Direction::i2t, 1) != table.at(Direction::i2t, 5)) {
    throw Error("caption-space protocol violated: i2t R@1 != R@5");
  }
}

}  // namespace fmapdiag
