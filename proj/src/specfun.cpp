#include "flatspec/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flatspec/errors.hpp"

namespace flatspec::specfun {

namespace {

// Below this argument the ascending series is summed directly; the largest
// term is then O(10), so cancellation costs at most one digit.
constexpr double kSeriesLimit = 5.0;

double series_j(double nu, double x) {
  const double half = 0.5 * x;
  const double q = half * half;
  double term = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
  double sum = term;
  for (int m = 0; m < 200; ++m) {
    term *= -q / ((m + 1.0) * (m + 1.0 + nu));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Miller's algorithm: recur downward from an order well above x, then fix the
// scale with (x/2)^nu = sum_k (nu+2k) Gamma(nu+k)/k! J_{nu+2k}(x).
double miller_j(double nu, double x) {
  const int top = 2 * (static_cast<int>(x / 2.0) + 40);
  double f_next = 0.0;   // order nu + n + 1
  double f = 1e-30;      // order nu + n
  double norm = 0.0;
  double f0 = 0.0;
  for (int n = top; n >= 0; --n) {
    if (n % 2 == 0) {
      const int k = n / 2;
      double c;
      if (k == 0) {
        c = std::tgamma(nu + 1.0);
      } else {
        c = (nu + 2.0 * k) * std::exp(std::lgamma(nu + k) - std::lgamma(k + 1.0));
      }
      norm += c * f;
    }
    if (n == 0) {
      f0 = f;
      break;
    }
    const double f_prev = 2.0 * (nu + n) / x * f - f_next;
    f_next = f;
    f = f_prev;
    if (std::abs(f) > 1e200) {
      f *= 1e-200;
      f_next *= 1e-200;
      norm *= 1e-200;
    }
  }
  return f0 / norm * std::exp(nu * std::log(0.5 * x));
}

void check_args(double nu, double x) {
  if (!std::isfinite(nu) || !std::isfinite(x) || nu < 0.0 || x < 0.0) {
    std::ostringstream msg;
    msg << "bessel_j: require finite nu >= 0 and x >= 0 (nu=" << nu << ", x=" << x << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

double bessel_j(double nu, double x) {
  check_args(nu, x);
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x < kSeriesLimit) return series_j(nu, x);
  return miller_j(nu, x);
}

double bessel_j_prime(double nu, double x) {
  check_args(nu, x);
  if (x == 0.0) {
    if (nu == 1.0) return 0.5;
    if (nu == 0.0 || nu > 1.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

double bessel_zero(double nu, int m) {
  if (!std::isfinite(nu) || nu < 0.0 || m < 1) {
    std::ostringstream msg;
    msg << "bessel_zero: require nu >= 0 and m >= 1 (nu=" << nu << ", m=" << m << ")";
    throw DomainError(msg.str());
  }
  // j_{nu,1} > nu and consecutive zeros are more than 2.4 apart, so a 0.25
  // step cannot skip a pair of sign changes.
  constexpr double step = 0.25;
  const double limit = nu + 2.0 * std::numbers::pi * (m + 2) + 10.0;
  double a = nu;
  double fa = bessel_j(nu, a);
  int count = 0;
  double lo = 0.0, hi = 0.0;
  while (true) {
    const double b = a + step;
    if (b > limit) {
      throw ConvergenceError("bessel_zero: no bracket found for nu=" + std::to_string(nu) +
                             ", m=" + std::to_string(m));
    }
    const double fb = bessel_j(nu, b);
    if (fb == 0.0 || (fa > 0.0) != (fb > 0.0)) {
      if (++count == m) {
        if (fb == 0.0) return b;
        lo = a;
        hi = b;
        break;
      }
    }
    a = b;
    fa = fb;
  }

  // McMahon's expansion as the seed when it lands in the bracket.
  const double beta = (m + 0.5 * nu - 0.25) * std::numbers::pi;
  const double mu = 4.0 * nu * nu;
  const double e = 8.0 * beta;
  double x = beta - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  const bool lo_positive = bessel_j(nu, lo) > 0.0;
  std::vector<double> trace;
  for (int it = 0; it < 100; ++it) {
    trace.push_back(x);
    const double f = bessel_j(nu, x);
    if (f == 0.0) return x;
    if ((f > 0.0) == lo_positive) {
      lo = x;
    } else {
      hi = x;
    }
    const double df = nu / x * f - bessel_j(nu + 1.0, x);
    double next = x - f / df;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4e-16 * x || hi - lo <= 4e-16 * x) return next;
    x = next;
  }
  throw ConvergenceError("bessel_zero: Newton iteration did not converge", std::move(trace));
}

double j01() {
  static const double value = bessel_zero(0.0, 1);
  return value;
}

}  // namespace flatspec::specfun
