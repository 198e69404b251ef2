#include "fmapdiag/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/SparseCholesky>

#include "fmapdiag/error.hpp"
#include "fmapdiag/rng.hpp"

namespace fmapdiag {
namespace {

using Operator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd random_unit(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v.normalized();
}

/// Two passes of classical Gram-Schmidt against the first `cols` columns.
void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index cols) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd coeffs = basis.leftCols(cols).transpose() * w;
    w.noalias() -= basis.leftCols(cols) * coeffs;
  }
}

/// Next Krylov direction: `w` orthogonalized and normalized, or a fresh
/// random direction when `w` lies (numerically) inside the basis.
Eigen::VectorXd next_direction(Eigen::VectorXd w, const Eigen::MatrixXd& basis, Eigen::Index cols, Rng& rng) {
  const double scale = w.norm();
  orthogonalize(w, basis, cols);
  double nrm = w.norm();
  for (int attempt = 0; nrm <= 1e-10 * std::max(scale, 1e-300) && attempt < 8; ++attempt) {
    w = random_unit(basis.rows(), rng);
    orthogonalize(w, basis, cols);
    nrm = w.norm();
  }
  if (!(nrm > 0.0)) throw NumericalError("Lanczos: unable to extend Krylov basis");
  return w / nrm;
}

Eigenpairs rayleigh_sorted(const Eigen::SparseMatrix<double>& a, const Eigen::MatrixXd& x) {
  const Eigen::Index count = x.cols();
  std::vector<double> rq(static_cast<std::size_t>(count));
  for (Eigen::Index j = 0; j < count; ++j) rq[j] = x.col(j).dot(a * x.col(j));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return rq[l] < rq[r]; });
  Eigenpairs out{Eigen::VectorXd(count), Eigen::MatrixXd(x.rows(), count)};
  for (Eigen::Index j = 0; j < count; ++j) {
    out.values(j) = rq[order[j]];
    out.vectors.col(j) = x.col(order[j]);
  }
  return out;
}

}  // namespace

Eigenpairs smallest_eigenpairs_dense(const Eigen::SparseMatrix<double>& a, Eigen::Index count) {
  if (a.rows() != a.cols()) throw InvalidArgument("eigensolve needs a square matrix");
  if (count < 1 || count > a.rows()) throw InvalidArgument("requested eigenpair count out of range");
  const Eigen::MatrixXd dense = Eigen::MatrixXd(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolve failed");
  return {solver.eigenvalues().head(count), solver.eigenvectors().leftCols(count)};
}

Eigenpairs smallest_eigenpairs_lanczos(const Eigen::SparseMatrix<double>& a, Eigen::Index count,
                                       const LanczosOptions& options) {
  const Eigen::Index n = a.rows();
  if (a.rows() != a.cols()) throw InvalidArgument("eigensolve needs a square matrix");
  if (count < 1 || count > n) throw InvalidArgument("requested eigenpair count out of range");

  Operator apply;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
  if (options.transform == SpectralTransform::shift_invert) {
    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    const Eigen::SparseMatrix<double> shifted = a + options.shift * identity;
    factor.compute(shifted);
    if (factor.info() != Eigen::Success) throw NumericalError("Lanczos: factorization of shifted matrix failed");
    apply = [&factor](const Eigen::VectorXd& x) -> Eigen::VectorXd { return factor.solve(x); };
  } else {
    const double ub = options.upper_bound;
    apply = [&a, ub](const Eigen::VectorXd& x) -> Eigen::VectorXd { return ub * x - a * x; };
  }

  const Eigen::Index m =
      std::min(n, options.subspace > 0 ? std::max(options.subspace, count + 1)
                                       : std::max(2 * count + 1, count + 20));
  Rng rng(options.seed);
  Eigen::MatrixXd basis(n, m);
  Eigen::MatrixXd image(n, m);  // operator applied to each basis column
  Eigen::Index cols = 0;
  Eigen::VectorXd v = random_unit(n, rng);

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    while (cols < m) {
      basis.col(cols) = v;
      image.col(cols) = apply(v);
      ++cols;
      if (cols < m) v = next_direction(image.col(cols - 1), basis, cols, rng);
    }

    Eigen::MatrixXd projected = basis.transpose() * image;
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(projected);
    if (ritz.info() != Eigen::Success) throw NumericalError("Lanczos: projected eigensolve failed");
    // Largest Ritz values of the operator are the wanted eigenpairs.
    const Eigen::VectorXd theta = ritz.eigenvalues().reverse();
    const Eigen::MatrixXd y = ritz.eigenvectors().rowwise().reverse();
    const Eigen::MatrixXd x = basis * y;
    const Eigen::MatrixXd ax = image * y;

    Eigen::Index first_unconverged = -1;
    for (Eigen::Index j = 0; j < count; ++j) {
      const double residual = (ax.col(j) - theta(j) * x.col(j)).norm();
      if (residual > options.tolerance * std::max(std::abs(theta(j)), 1e-300)) {
        first_unconverged = j;
        break;
      }
    }
    if (first_unconverged < 0) return rayleigh_sorted(a, x.leftCols(count));
    if (m == n) {
      // The basis spans the whole space; the Ritz pairs are exact up to
      // round-off, so the tolerance is unattainable rather than unmet.
      return rayleigh_sorted(a, x.leftCols(count));
    }

    const Eigen::Index keep = std::min(count + (m - count) / 2, m - 1);
    basis.leftCols(keep) = x.leftCols(keep);
    image.leftCols(keep) = ax.leftCols(keep);
    cols = keep;
    const Eigen::VectorXd residual =
        ax.col(first_unconverged) - theta(first_unconverged) * x.col(first_unconverged);
    v = next_direction(residual, basis, cols, rng);
  }
  throw NumericalError("Lanczos did not converge within " + std::to_string(options.max_restarts) +
                       " restarts");
}

}  // namespace fmapdiag
