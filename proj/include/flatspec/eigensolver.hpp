#pragma once

#include <Eigen/SparseCore>

#include "flatspec/eigen_result.hpp"

namespace flatspec::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct EigenOptions {
  int max_iterations = 500;
  double tolerance = 1e-9;             // relative residual per wanted pair
  std::size_t dense_threshold = 600;   // dense generalized solver at or below
};

/// Smallest `count` eigenpairs of K x = lambda M x, K symmetric positive
/// semidefinite, M symmetric positive definite.
///
/// Shift-invert block subspace iteration with Rayleigh-Ritz: K + sigma M is
/// factored once (sparse LDL^T, sigma = 1e-6 tr K / tr M keeps the constant
/// mode), the block is M-orthonormalized every sweep, and the block carries
/// max(2 count, count + 8) vectors so clustered or repeated eigenvalues
/// converge together. Vectors are M-normalized with the first significant
/// entry positive; residuals are |K x - lambda M x| / (lambda_max |M x|).
/// Throws ConvergenceError with the last residuals when the tolerance is not
/// met.
EigenResult smallest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M, int count,
                                const EigenOptions& options = {});

}  // namespace flatspec::fem
