#pragma once

#include <vector>

#include <json.hpp>

namespace flatspec {

/// Piecewise-linear q = p^{1/(d-1)} on [0, 1], the weight of the collapsed
/// one-dimensional problem. Values at breakpoints; q is concave and
/// nonnegative, p(x) = q(x)^(dim-1).
struct ProfileWeight {
  std::vector<double> breakpoints;  // 0 = x_0 < ... < x_M = 1
  std::vector<double> q_values;
  int dim = 2;

  double q(double x) const;
  double p(double x) const;

  /// Throws DomainError if any invariant fails.
  void validate() const;

  /// Symmetric or asymmetric tent with apex at `apex`, q(apex) = 1.
  static ProfileWeight tent(int dim, double apex = 0.5);
  /// q = 1 on [left, right], linear down to 0 at both ends.
  static ProfileWeight trapezoid(int dim, double left, double right);
  /// q == 1.
  static ProfileWeight constant(int dim);

  /// Same weight reflected about x = 1/2.
  ProfileWeight reflected() const;
};

void to_json(nlohmann::json& j, const ProfileWeight& w);
void from_json(const nlohmann::json& j, ProfileWeight& w);

}  // namespace flatspec
