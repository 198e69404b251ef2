#pragma once

#include <span>
#include <utility>

#include <Eigen/Dense>

#include "fmapdiag/dataio.hpp"
#include "fmapdiag/retrieval.hpp"

namespace fmapdiag {

/// Both matrices cut to min(d_v, d_t) columns. `first_coordinates` keeps the
/// leading coordinates; `pca` projects each onto its own top principal
/// directions.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> truncate_to_common_dim(const EmbeddingMatrix& source,
                                                                   const EmbeddingMatrix& target,
                                                                   TruncationMode mode = TruncationMode::first_coordinates);

/// Row-wise cosine similarity matrix. Throws InvalidArgument naming the
/// first zero-norm row.
Eigen::MatrixXd cosine_similarity(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& targets);

/// Cosine similarity of the truncated raw embeddings; the chance floor for
/// independently trained encoders.
ScoreMatrix raw_cosine_scores(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                              TruncationMode mode = TruncationMode::first_coordinates);

struct ProcrustesAlignment {
  Eigen::MatrixXd rotation;  ///< d x d orthogonal; source rows map as z R
  Eigen::Index truncation_dim = 0;
  bool centered = false;
  Eigen::RowVectorXd source_mean;  ///< zero unless centered
  Eigen::RowVectorXd target_mean;
};

/// argmin over orthogonal R of || Zs_S R - Zt_S ||_F via the SVD of
/// Zs_S^T Zt_S. Reflections are allowed; when the cross-covariance is
/// rank-deficient the free null-space completion is chosen so det R = +1.
ProcrustesAlignment fit_procrustes(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                                   const AnchorSet& anchors, bool center = false,
                                   TruncationMode mode = TruncationMode::first_coordinates);

/// Same fit on already-truncated matrices.
ProcrustesAlignment fit_procrustes(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                                   const AnchorSet& anchors, bool center = false);

/// Cosine similarity between aligned source rows and target rows.
ScoreMatrix procrustes_scores(const ProcrustesAlignment& fit, const EmbeddingMatrix& source,
                              const EmbeddingMatrix& target, TruncationMode mode = TruncationMode::first_coordinates);

/// N x |S| matrix of cosine similarities to the anchor points.
Eigen::MatrixXd relative_representation(const EmbeddingMatrix& z, std::span<const Eigen::Index> anchors);

/// Cosine similarity between the two modalities' relative representations.
ScoreMatrix relative_scores(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const AnchorSet& anchors);

struct CcaFit {
  Eigen::MatrixXd source_projection;  ///< d_v x n_components
  Eigen::MatrixXd target_projection;  ///< d_t x n_components
  Eigen::RowVectorXd source_mean;
  Eigen::RowVectorXd target_mean;
  Eigen::VectorXd correlations;  ///< canonical correlations, nonincreasing
};

/// Regularized CCA fitted on the anchor rows: each view is whitened by
/// (Sigma + ridge I)^{-1/2}, then the whitened cross-covariance is
/// decomposed by SVD.
CcaFit fit_cca(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const AnchorSet& anchors, double ridge,
               Eigen::Index n_components);

/// Cosine similarity in the shared canonical space.
ScoreMatrix cca_scores(const CcaFit& fit, const EmbeddingMatrix& source, const EmbeddingMatrix& target);

}  // namespace fmapdiag
