#pragma once

#include <functional>
#include <span>
#include <vector>

namespace flatspec::specfun {

/// Bessel function of the first kind J_nu(x) for real nu >= 0, x >= 0.
///
/// Absolute error is below 1e-12 for nu <= 10 and x <= 50. Small arguments use
/// the ascending series; larger ones use Miller's backward recurrence
/// normalized by the Neumann sum identity. Throws DomainError for negative or
/// non-finite input.
double bessel_j(double nu, double x);

/// Derivative J_nu'(x) = (nu/x) J_nu(x) - J_{nu+1}(x).
double bessel_j_prime(double nu, double x);

/// m-th positive zero j_{nu,m} of J_nu (m >= 1). Supported range nu <= 10,
/// m <= 20 is where the accuracy contract is tested; larger values work but
/// are not guaranteed.
double bessel_zero(double nu, int m);

/// First positive zero of J_0, cached.
double j01();

struct QuadratureRule {
  std::vector<double> nodes;    // increasing, in [-1, 1]
  std::vector<double> weights;  // positive, sum to 2
  int order = 0;
};

/// Gauss-Legendre rule with n nodes, 1 <= n <= 256.
QuadratureRule gauss_legendre(int n);

/// Composite rule over [a, b] split into `panels` equal panels.
/// Throws EvaluationError carrying the abscissa if f returns a non-finite value.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureRule& rule, int panels);

/// Composite rule over consecutive pieces [cuts[i], cuts[i+1]]; each piece gets
/// ceil(panels_per_unit * length) panels (at least one). Used when the
/// integrand has kinks at known abscissae.
double integrate_pieces(const std::function<double(double)>& f,
                        std::span<const double> cuts, const QuadratureRule& rule,
                        double panels_per_unit);

}  // namespace flatspec::specfun
