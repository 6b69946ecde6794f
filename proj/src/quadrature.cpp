#include <cmath>
#include <numbers>
#include <utility>
#include <sstream>

#include "flatspec/errors.hpp"
#include "flatspec/specfun.hpp"

namespace flatspec::specfun {

QuadratureRule gauss_legendre(int n) {
  if (n < 1 || n > 256) {
    throw DomainError("gauss_legendre: order must lie in [1, 256], got " + std::to_string(n));
  }
  QuadratureRule rule;
  rule.order = n;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  // Legendre P_n and P_n' at z by the three-term recurrence.
  const auto legendre = [n](double z) {
    double p0 = 1.0;
    double p1 = z;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (z * p1 - p0) / (z * z - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(z);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double dp = legendre(z).second;
    if (n % 2 == 1 && i == (n - 1) / 2) z = 0.0;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureRule& rule, int panels) {
  if (!(a < b) || panels < 1) {
    std::ostringstream msg;
    msg << "integrate: require a < b and panels >= 1 (a=" << a << ", b=" << b
        << ", panels=" << panels << ")";
    throw DomainError(msg.str());
  }
  const double width = (b - a) / panels;
  const double half = 0.5 * width;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = mid + half * rule.nodes[i];
      const double v = f(t);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "integrate: integrand is not finite at x=" << t;
        throw EvaluationError(msg.str(), t);
      }
      panel += rule.weights[i] * v;
    }
    total += half * panel;
  }
  return total;
}

double integrate_pieces(const std::function<double(double)>& f, std::span<const double> cuts,
                        const QuadratureRule& rule, double panels_per_unit) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len < 0.0) throw DomainError("integrate_pieces: cut points must be nondecreasing");
    if (len == 0.0) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil(panels_per_unit * len - 1e-9)));
    total += integrate(f, cuts[i], cuts[i + 1], rule, panels);
  }
  return total;
}

}  // namespace flatspec::specfun
