#include "flatspec/profile_weight.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flatspec/errors.hpp"

namespace flatspec {

double ProfileWeight::q(double x) const {
  if (x <= breakpoints.front()) return x == breakpoints.front() ? q_values.front() : 0.0;
  if (x >= breakpoints.back()) return x == breakpoints.back() ? q_values.back() : 0.0;
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  const double t = (x - breakpoints[i]) / (breakpoints[i + 1] - breakpoints[i]);
  return q_values[i] + t * (q_values[i + 1] - q_values[i]);
}

double ProfileWeight::p(double x) const {
  const double v = q(x);
  double out = 1.0;
  for (int i = 1; i < dim; ++i) out *= v;
  return out;
}

void ProfileWeight::validate() const {
  const auto fail = [](const std::string& why) {
    throw DomainError("invalid profile weight: " + why);
  };
  if (dim < 2) fail("dimension must be at least 2");
  if (breakpoints.size() < 2 || breakpoints.size() != q_values.size()) {
    fail("need at least two breakpoints and one q value per breakpoint");
  }
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0) fail("breakpoints must span [0, 1]");
  bool positive = false;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!std::isfinite(q_values[i]) || q_values[i] < 0.0) fail("q must be finite and nonnegative");
    if (q_values[i] > 0.0) positive = true;
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) fail("breakpoints must increase strictly");
  }
  if (!positive) fail("q is identically zero");
  for (std::size_t i = 1; i + 1 < breakpoints.size(); ++i) {
    const double left = breakpoints[i] - breakpoints[i - 1];
    const double right = breakpoints[i + 1] - breakpoints[i];
    const double s0 = (q_values[i] - q_values[i - 1]) / left;
    const double s1 = (q_values[i + 1] - q_values[i]) / right;
    if ((s1 - s0) * std::min(left, right) > 1e-12) {
      std::ostringstream msg;
      msg << "q is not concave at x=" << breakpoints[i];
      fail(msg.str());
    }
  }
}

ProfileWeight ProfileWeight::tent(int dim, double apex) {
  if (!(apex > 0.0 && apex < 1.0)) throw DomainError("tent apex must lie in (0, 1)");
  return ProfileWeight{{0.0, apex, 1.0}, {0.0, 1.0, 0.0}, dim};
}

ProfileWeight ProfileWeight::trapezoid(int dim, double left, double right) {
  if (!(left > 0.0 && left <= right && right < 1.0)) {
    throw DomainError("trapezoid plateau must satisfy 0 < left <= right < 1");
  }
  if (left == right) return tent(dim, left);
  return ProfileWeight{{0.0, left, right, 1.0}, {0.0, 1.0, 1.0, 0.0}, dim};
}

ProfileWeight ProfileWeight::constant(int dim) {
  return ProfileWeight{{0.0, 1.0}, {1.0, 1.0}, dim};
}

ProfileWeight ProfileWeight::reflected() const {
  ProfileWeight out;
  out.dim = dim;
  const std::size_t n = breakpoints.size();
  out.breakpoints.resize(n);
  out.q_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.breakpoints[i] = 1.0 - breakpoints[n - 1 - i];
    out.q_values[i] = q_values[n - 1 - i];
  }
  out.breakpoints.front() = 0.0;
  out.breakpoints.back() = 1.0;
  return out;
}

void to_json(nlohmann::json& j, const ProfileWeight& w) {
  j = nlohmann::json{{"d", w.dim}, {"breakpoints", w.breakpoints}, {"q", w.q_values}};
}

void from_json(const nlohmann::json& j, ProfileWeight& w) {
  j.at("d").get_to(w.dim);
  j.at("breakpoints").get_to(w.breakpoints);
  j.at("q").get_to(w.q_values);
}

}  // namespace flatspec
