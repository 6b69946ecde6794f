#pragma once

#include <optional>
#include <random>
#include <span>

#include "flatspec/eigen_result.hpp"
#include "flatspec/profile_weight.hpp"

namespace flatspec::sturm {

/// First k+1 eigenpairs of -(p u')' = mu p u on (0, 1) with the natural
/// condition p u' = 0 at both ends, p = q^(dim-1).
///
/// Conforming quadratic Galerkin (vertex hats plus one bubble per element) on
/// a uniform mesh of `n_elems` elements; element integrals are split at the
/// weight's breakpoints and integrated exactly, so every computed mu_j is an
/// upper bound for the true one and decreases under nested refinement.
/// Eigenvalues come from Sylvester-inertia bisection (bubbles condensed out,
/// leaving a tridiagonal Schur complement), eigenvectors from inverse
/// iteration. Each vector holds the 2 n_elems + 1 values at x = i / (2 n_elems),
/// normalized to int u^2 p = 1 with the first significant value positive.
/// n_dof counts vertex and bubble unknowns.
///
/// Requires n_elems >= 8k. Throws DomainError on an invalid weight or a
/// singular mass matrix and ConvergenceError (with residuals) when inverse
/// iteration does not settle.
EigenResult sl_eigs(const ProfileWeight& weight, int k, int n_elems);

/// int u v p over (0, 1) for two sampled eigenvectors of sl_eigs (exact for
/// the piecewise quadratics they represent).
double weighted_inner(const ProfileWeight& weight, std::span<const double> u, std::span<const double> v);

/// mu_k alone, same discretization as sl_eigs. Cheaper: no eigenvectors.
double sl_eigenvalue(const ProfileWeight& weight, int k, int n_elems);

/// Sharp upper bound mu*_{k,d} for D^2 mu_k over convex bodies in R^d.
/// 1 <= k <= 20, 2 <= d <= 22.
double kroger_bound(int k, int d);

struct TrapezoidOptimum {
  double plateau = 0.0;  // right - left
  double left = 0.5;     // plateau endpoints; left == right is a tent
  double right = 0.5;
  double mu_k = 0.0;
};

/// Maximizes mu_k over trapezoidal q (q = 1 on [left, right], linear to 0 at
/// the ends). Two one-parameter families are searched: symmetric plateaus
/// [(1 - s)/2, (1 + s)/2] with s in [0, 0.999] and tents with apex in
/// [0.001, 1/2]. mu_k is multimodal in both parameters, so each search is a
/// 101-point scan followed by golden-section refinement around the best node.
/// k >= 2, d >= 2, d != 3.
TrapezoidOptimum optimize_trapezoid(int k, int d, int n_elems);

/// Extremal weight: the symmetric tent for k = 1, the symmetric trapezoid of
/// the given plateau fraction for k >= 2, or the optimize_trapezoid result when
/// the plateau is omitted. Rejects d = 3 with k >= 2 (no unique maximizer) and
/// a plateau for k = 1.
ProfileWeight maximizer_profile(int k, int d, std::optional<double> plateau = std::nullopt);

/// True iff mu_k(weight) <= kroger_bound(k, dim) up to the discretization
/// error, estimated as 3 |mu_k(n/2) - mu_k(n)| (the computed value is an
/// upper bound, so only this side needs slack).
bool strictness_check(const ProfileWeight& weight, int k, int n_elems);

/// Random concave piecewise-linear q >= 0 with up to `max_pieces` pieces and
/// max q = 1.
ProfileWeight random_concave_weight(std::mt19937_64& rng, int dim, int max_pieces = 8);

}  // namespace flatspec::sturm
