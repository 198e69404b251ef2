#include "fmapdiag/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "fmapdiag/error.hpp"

namespace fmapdiag {
namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) throw InvalidArgument("anchor index out of range");
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

Eigen::MatrixXd row_normalized(const Eigen::MatrixXd& m, const char* what) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double nrm = m.row(i).norm();
    if (!(nrm > 0.0)) throw InvalidArgument(std::string(what) + " row " + std::to_string(i) + " has zero norm");
    out.row(i) /= nrm;
  }
  return out;
}

Eigen::MatrixXd pca_project(const Eigen::MatrixXd& z, Eigen::Index components) {
  const Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  return centered * svd.matrixV().leftCols(components);
}

/// Symmetric inverse square root; rejects (numerically) singular input.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& s, const char* view) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) throw NumericalError(std::string("CCA: eigensolve failed for ") + view);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = std::max(values.maxCoeff(), 0.0);
  if (!(values.minCoeff() > 1e-12 * top) || !(top > 0.0)) {
    throw NumericalError(std::string("CCA: singular ") + view + " covariance; use ridge > 0");
  }
  return eig.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> truncate_to_common_dim(const EmbeddingMatrix& source,
                                                                   const EmbeddingMatrix& target,
                                                                   TruncationMode mode) {
  const Eigen::Index d = std::min(source.dim(), target.dim());
  if (mode == TruncationMode::pca) {
    const Eigen::Index components = std::min({d, source.n_points(), target.n_points()});
    return {pca_project(source.data(), components), pca_project(target.data(), components)};
  }
  return {source.data().leftCols(d), target.data().leftCols(d)};
}

Eigen::MatrixXd cosine_similarity(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& targets) {
  if (queries.cols() != targets.cols()) throw InvalidArgument("cosine similarity needs equal dimensions");
  return row_normalized(queries, "query") * row_normalized(targets, "target").transpose();
}

ScoreMatrix raw_cosine_scores(const EmbeddingMatrix& source, const EmbeddingMatrix& target, TruncationMode mode) {
  const auto [s, t] = truncate_to_common_dim(source, target, mode);
  return ScoreMatrix(cosine_similarity(s, t), Direction::i2t);
}

ProcrustesAlignment fit_procrustes(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                                   const AnchorSet& anchors, bool center) {
  if (anchors.empty()) throw InvalidArgument("Procrustes needs at least one anchor");
  if (source.cols() != target.cols()) throw InvalidArgument("Procrustes needs matrices of equal width");
  const auto src_idx = anchors.source_indices();
  const auto tgt_idx = anchors.target_indices();
  Eigen::MatrixXd xs = gather_rows(source, src_idx);
  Eigen::MatrixXd xt = gather_rows(target, tgt_idx);
  const Eigen::Index d = source.cols();

  ProcrustesAlignment fit;
  fit.truncation_dim = d;
  fit.centered = center;
  fit.source_mean = Eigen::RowVectorXd::Zero(d);
  fit.target_mean = Eigen::RowVectorXd::Zero(d);
  if (center) {
    fit.source_mean = xs.colwise().mean();
    fit.target_mean = xt.colwise().mean();
    xs.rowwise() -= fit.source_mean;
    xt.rowwise() -= fit.target_mean;
  }

  const Eigen::MatrixXd cross = xs.transpose() * xt;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(0) > 0.0)) throw NumericalError("Procrustes: anchor cross-covariance is zero");
  Eigen::MatrixXd u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  const bool rank_deficient = sv(d - 1) <= 1e-12 * sv(0);
  if (rank_deficient && (u * v.transpose()).determinant() < 0.0) u.col(d - 1) *= -1.0;
  fit.rotation = u * v.transpose();
  return fit;
}

ProcrustesAlignment fit_procrustes(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                                   const AnchorSet& anchors, bool center, TruncationMode mode) {
  const auto [s, t] = truncate_to_common_dim(source, target, mode);
  return fit_procrustes(s, t, anchors, center);
}

ScoreMatrix procrustes_scores(const ProcrustesAlignment& fit, const EmbeddingMatrix& source,
                              const EmbeddingMatrix& target, TruncationMode mode) {
  auto [s, t] = truncate_to_common_dim(source, target, mode);
  if (s.cols() != fit.rotation.rows()) throw InvalidArgument("Procrustes fit does not match embedding width");
  s.rowwise() -= fit.source_mean;
  t.rowwise() -= fit.target_mean;
  return ScoreMatrix(cosine_similarity(s * fit.rotation, t), Direction::i2t);
}

Eigen::MatrixXd relative_representation(const EmbeddingMatrix& z, std::span<const Eigen::Index> anchors) {
  if (anchors.empty()) throw InvalidArgument("relative representation needs at least one anchor");
  const Eigen::MatrixXd unit = row_normalized(z.data(), "embedding");
  return unit * gather_rows(unit, anchors).transpose();
}

ScoreMatrix relative_scores(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const AnchorSet& anchors) {
  const auto src = anchors.source_indices();
  const auto tgt = anchors.target_indices();
  return ScoreMatrix(cosine_similarity(relative_representation(source, src), relative_representation(target, tgt)),
                     Direction::i2t);
}

CcaFit fit_cca(const EmbeddingMatrix& source, const EmbeddingMatrix& target, const AnchorSet& anchors, double ridge,
               Eigen::Index n_components) {
  const auto n = static_cast<Eigen::Index>(anchors.budget());
  if (!(ridge >= 0.0)) throw InvalidArgument("CCA ridge must be nonnegative");
  if (n_components < 1 || n_components > std::min({n - 1, source.dim(), target.dim()})) {
    throw InvalidArgument("CCA n_components=" + std::to_string(n_components) + " infeasible for |S|=" +
                          std::to_string(n) + ", d=(" + std::to_string(source.dim()) + "," +
                          std::to_string(target.dim()) + ")");
  }
  const auto src_idx = anchors.source_indices();
  const auto tgt_idx = anchors.target_indices();
  Eigen::MatrixXd x = gather_rows(source.data(), src_idx);
  Eigen::MatrixXd y = gather_rows(target.data(), tgt_idx);

  CcaFit fit;
  fit.source_mean = x.colwise().mean();
  fit.target_mean = y.colwise().mean();
  x.rowwise() -= fit.source_mean;
  y.rowwise() -= fit.target_mean;
  const double denom = static_cast<double>(n - 1);
  const Eigen::MatrixXd sxx = x.transpose() * x / denom + ridge * Eigen::MatrixXd::Identity(x.cols(), x.cols());
  const Eigen::MatrixXd syy = y.transpose() * y / denom + ridge * Eigen::MatrixXd::Identity(y.cols(), y.cols());
  const Eigen::MatrixXd sxy = x.transpose() * y / denom;

  const Eigen::MatrixXd wx = inverse_sqrt(sxx, "source");
  const Eigen::MatrixXd wy = inverse_sqrt(syy, "target");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(wx * sxy * wy, Eigen::ComputeThinU | Eigen::ComputeThinV);
  fit.source_projection = wx * svd.matrixU().leftCols(n_components);
  fit.target_projection = wy * svd.matrixV().leftCols(n_components);
  fit.correlations = svd.singularValues().head(n_components);
  return fit;
}

ScoreMatrix cca_scores(const CcaFit& fit, const EmbeddingMatrix& source, const EmbeddingMatrix& target) {
  const Eigen::MatrixXd ps = (source.data().rowwise() - fit.source_mean) * fit.source_projection;
  const Eigen::MatrixXd pt = (target.data().rowwise() - fit.target_mean) * fit.target_projection;
  return ScoreMatrix(cosine_similarity(ps, pt), Direction::i2t);
}

}  // namespace fmapdiag
