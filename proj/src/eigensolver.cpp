#include "flatspec/eigensolver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "flatspec/errors.hpp"

namespace flatspec::fem {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void fix_sign(VectorXd& x) {
  const double peak = x.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > 1e-8 * peak) {
      if (x(i) < 0.0) x = -x;
      return;
    }
  }
}

EigenResult package(const SparseMatrix& K, const SparseMatrix& M, const VectorXd& values, const MatrixXd& vectors,
                    int count) {
  EigenResult out;
  out.n_dof = static_cast<std::size_t>(K.rows());
  const double scale = std::max(std::abs(values(count - 1)), 1e-300);
  for (int i = 0; i < count; ++i) {
    VectorXd x = vectors.col(i);
    x /= std::sqrt(x.dot(M * x));
    fix_sign(x);
    const VectorXd mx = M * x;
    out.values.push_back(values(i));
    out.residuals.push_back((K * x - values(i) * mx).norm() / (scale * mx.norm()));
    out.vectors.emplace_back(x.data(), x.data() + x.size());
  }
  return out;
}

// M-orthonormalizes the columns of Y (Cholesky QR, twice). Returns false when
// the block has lost rank.
bool m_orthonormalize(MatrixXd& Y, const SparseMatrix& M) {
  for (int pass = 0; pass < 2; ++pass) {
    const MatrixXd G = Y.transpose() * (M * Y);
    Eigen::LLT<MatrixXd> llt(0.5 * (G + G.transpose()));
    if (llt.info() != Eigen::Success) return false;
    Y = llt.matrixU().solve<Eigen::OnTheRight>(Y);
  }
  return true;
}

}  // namespace

EigenResult smallest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M, int count,
                                const EigenOptions& options) {
  const Eigen::Index n = K.rows();
  if (count < 1 || count > n) throw DomainError("smallest_eigenpairs: count must lie in [1, n]");
  if (K.cols() != n || M.rows() != n || M.cols() != n) throw DomainError("smallest_eigenpairs: size mismatch");

  if (static_cast<std::size_t>(n) <= options.dense_threshold) {
    const MatrixXd Kd(K), Md(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(Kd, Md);
    if (ges.info() != Eigen::Success) throw ConvergenceError("smallest_eigenpairs: dense solver failed");
    return package(K, M, ges.eigenvalues(), ges.eigenvectors(), count);
  }

  const double sigma = 1e-6 * K.diagonal().sum() / M.diagonal().sum();
  const SparseMatrix A = K + sigma * M;
  Eigen::SimplicialLDLT<SparseMatrix> solver(A);
  if (solver.info() != Eigen::Success) throw ConvergenceError("smallest_eigenpairs: factorization of K + sigma M failed");

  const Eigen::Index block = std::min<Eigen::Index>(n, std::max(2 * count, count + 8));
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = j == 0 ? 1.0 : u(rng);
  }

  std::vector<double> residuals(count, 0.0);
  VectorXd theta;
  for (int it = 0; it < options.max_iterations; ++it) {
    MatrixXd Y = solver.solve(M * X);
    if (!m_orthonormalize(Y, M)) {
      // Restart the degenerate columns with fresh random directions.
      for (Eigen::Index j = count; j < block; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) Y(i, j) = u(rng);
      }
      if (!m_orthonormalize(Y, M)) throw ConvergenceError("smallest_eigenpairs: block lost rank");
    }
    const MatrixXd H = Y.transpose() * (K * Y);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(0.5 * (H + H.transpose()));
    theta = ritz.eigenvalues();
    X = Y * ritz.eigenvectors();

    const double scale = std::max(std::abs(theta(count - 1)), 1e-300);
    bool done = true;
    for (int i = 0; i < count; ++i) {
      const VectorXd x = X.col(i);
      const VectorXd mx = M * x;
      residuals[i] = (K * x - theta(i) * mx).norm() / (scale * mx.norm());
      done = done && residuals[i] <= options.tolerance;
    }
    if (done) return package(K, M, theta, X, count);
  }
  std::ostringstream msg;
  msg << "smallest_eigenpairs: no convergence after " << options.max_iterations << " sweeps (worst residual "
      << *std::max_element(residuals.begin(), residuals.end()) << ")";
  throw ConvergenceError(msg.str(), residuals);
}

}  // namespace flatspec::fem
