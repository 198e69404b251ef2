#include "fmapdiag/functional_map.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fmapdiag/error.hpp"

namespace fmapdiag {

FunctionalMap::FunctionalMap(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) throw InvalidArgument("functional map must be non-empty");
  if (!matrix_.allFinite()) throw NumericalError("functional map has non-finite entries");
}

Eigen::MatrixXd probe_matrix(const SpectralBasis& basis, std::span<const Eigen::Index> anchors, double smoothing) {
  if (!(smoothing >= 0.0)) throw InvalidArgument("probe smoothing must be nonnegative");
  const Eigen::VectorXd decay = (-basis.values().array() * smoothing).exp().matrix();
  Eigen::MatrixXd coeffs(basis.dim(), static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t s = 0; s < anchors.size(); ++s) {
    const Eigen::Index a = anchors[s];
    if (a < 0 || a >= basis.n_points()) throw InvalidArgument("probe anchor index out of range");
    coeffs.col(static_cast<Eigen::Index>(s)) = decay.cwiseProduct(basis.vectors().row(a).transpose());
  }
  return coeffs;
}

ProbeCoeffs anchor_probes(const SpectralBasis& source, const SpectralBasis& target, const AnchorSet& anchors,
                          double smoothing) {
  const auto src = anchors.source_indices();
  const auto tgt = anchors.target_indices();
  return {probe_matrix(source, src, smoothing), probe_matrix(target, tgt, smoothing)};
}

FunctionalMap solve_fmap(const ProbeCoeffs& probes, const Eigen::VectorXd& source_values,
                         const Eigen::VectorXd& target_values, const FmapWeights& weights) {
  const Eigen::MatrixXd& a = probes.source;
  const Eigen::MatrixXd& b = probes.target;
  const Eigen::Index k_src = a.rows();
  const Eigen::Index k_tgt = b.rows();
  if (a.cols() != b.cols()) throw InvalidArgument("probe matrices have different column counts");
  if (source_values.size() != k_src || target_values.size() != k_tgt) {
    throw InvalidArgument("eigenvalue vectors do not match probe dimensions");
  }
  if (!(weights.commutativity >= 0.0) || !(weights.tikhonov >= 0.0)) {
    throw InvalidArgument("functional map weights must be nonnegative");
  }

  const Eigen::MatrixXd gram = a * a.transpose();
  const Eigen::MatrixXd rhs = a * b.transpose();  // column i is A b_i
  Eigen::MatrixXd c(k_tgt, k_src);
  for (Eigen::Index i = 0; i < k_tgt; ++i) {
    Eigen::MatrixXd system = gram;
    for (Eigen::Index j = 0; j < k_src; ++j) {
      const double gap = source_values(j) - target_values(i);
      system(j, j) += weights.commutativity * gap * gap + weights.tikhonov;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    const double scale = std::max(system.diagonal().maxCoeff(), std::numeric_limits<double>::min());
    if (llt.info() != Eigen::Success || llt.rcond() < 1e3 * std::numeric_limits<double>::epsilon() ||
        system.diagonal().minCoeff() <= 1e-14 * scale) {
      throw NumericalError("functional map system for row " + std::to_string(i) +
                           " is singular; the probes are rank-deficient, use lambda_tik > 0");
    }
    c.row(i) = llt.solve(rhs.col(i)).transpose();
  }
  return FunctionalMap(std::move(c));
}

FunctionalMap solve_fmap_unsupervised(const HksDescriptor& source_hks, const HksDescriptor& target_hks,
                                      const SpectralBasis& source, const SpectralBasis& target,
                                      const FmapWeights& weights) {
  if (source_hks.values.cols() != target_hks.values.cols()) {
    throw InvalidArgument("HKS descriptors use different scale counts (" + std::to_string(source_hks.values.cols()) +
                          " vs " + std::to_string(target_hks.values.cols()) + ")");
  }
  if (source_hks.values.rows() != source.n_points() || target_hks.values.rows() != target.n_points()) {
    throw InvalidArgument("HKS descriptor does not match its basis");
  }
  ProbeCoeffs probes{source.vectors().transpose() * source_hks.values,
                     target.vectors().transpose() * target_hks.values};
  return solve_fmap(probes, source.values(), target.values(), weights);
}

PointwiseMap pointwise_from_fmap(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target) {
  if (map.source_dim() > source.dim() || map.target_dim() > target.dim()) {
    throw InvalidArgument("functional map is larger than the supplied bases");
  }
  // Row i of `mapped` is C phi_src(i).
  const Eigen::MatrixXd mapped = source.vectors().leftCols(map.source_dim()) * map.matrix().transpose();
  const Eigen::MatrixXd tgt = target.vectors().leftCols(map.target_dim());
  const Eigen::Index n_src = mapped.rows();
  const Eigen::Index n_tgt = tgt.rows();
  const Eigen::Index k = tgt.cols();

  PointwiseMap out;
  out.assignment.resize(static_cast<std::size_t>(n_src));
  for (Eigen::Index i = 0; i < n_src; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = 0;
    for (Eigen::Index j = 0; j < n_tgt; ++j) {
      double d2 = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double diff = mapped(i, c) - tgt(j, c);
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        best_j = j;
      }
    }
    out.assignment[static_cast<std::size_t>(i)] = best_j;
  }
  return out;
}

Eigen::MatrixXd nearest_orthogonal(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("orthogonal projection needs a square matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

std::vector<Eigen::Index> ZoomOutSchedule::dimensions() const {
  std::vector<Eigen::Index> dims;
  dims.reserve(static_cast<std::size_t>(steps) + 1);
  const double span = static_cast<double>(max - start);
  for (int t = 0; t <= steps; ++t) {
    dims.push_back(start + static_cast<Eigen::Index>(std::llround(span * t / steps)));
  }
  return dims;
}

FunctionalMap zoomout(const FunctionalMap& initial, const SpectralBasis& source, const SpectralBasis& target,
                      const ZoomOutSchedule& schedule, std::vector<FunctionalMap>* trace) {
  if (schedule.steps < 1) throw InvalidArgument("ZoomOut needs at least one step");
  if (schedule.start > schedule.max) throw InvalidArgument("ZoomOut start exceeds max");
  if (!initial.square() || initial.source_dim() != schedule.start) {
    throw InvalidArgument("ZoomOut initial map must be " + std::to_string(schedule.start) + "x" +
                          std::to_string(schedule.start));
  }
  if (schedule.max > source.dim() || schedule.max > target.dim()) {
    throw InvalidArgument("ZoomOut max dimension " + std::to_string(schedule.max) +
                          " exceeds the available basis dimension");
  }
  const auto dims = schedule.dimensions();
  FunctionalMap current = initial;
  for (std::size_t t = 0; t + 1 < dims.size(); ++t) {
    const PointwiseMap p2p = pointwise_from_fmap(current, source, target);
    const Eigen::Index next = dims[t + 1];
    const auto phi_src = source.vectors().leftCols(next);
    const auto phi_tgt = target.vectors().leftCols(next);
    // Phi_tgt^T P Phi_src with P(T(i), i) = 1.
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(next, next);
    for (Eigen::Index i = 0; i < phi_src.rows(); ++i) {
      c.noalias() += phi_tgt.row(p2p.assignment[static_cast<std::size_t>(i)]).transpose() * phi_src.row(i);
    }
    current = FunctionalMap(nearest_orthogonal(c));
    if (trace) trace->push_back(current);
  }
  return current;
}

FunctionalMap compose(const FunctionalMap& a_to_b, const FunctionalMap& b_to_c) {
  if (b_to_c.source_dim() != a_to_b.target_dim()) {
    throw InvalidArgument("cannot compose: inner dimensions " + std::to_string(a_to_b.target_dim()) + " and " +
                          std::to_string(b_to_c.source_dim()) + " differ");
  }
  return FunctionalMap(b_to_c.matrix() * a_to_b.matrix());
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_fmap(const FunctionalMap& map, const std::filesystem::path& path, const std::string& config_json) {
  save_matrix_binary(map.matrix(), path);
  nlohmann::json sidecar{{"source_dim", map.source_dim()},
                         {"target_dim", map.target_dim()},
                         {"config_hash", config_hash(config_json)}};
  std::ofstream out(path.string() + ".json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string() + ".json");
  out << sidecar.dump(2) << '\n';
}

}  // namespace fmapdiag
