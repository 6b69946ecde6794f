#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flatspec/errors.hpp"
#include "flatspec/specfun.hpp"

using namespace flatspec;
using namespace flatspec::specfun;

namespace {

struct Reference {
  double nu;
  double x;
  double value;
};

// 40-digit values from an arbitrary-precision library, rounded to 20 digits.
constexpr Reference kReference[] = {
    {0, 0.5, 0.93846980724081290423},     {0, 3.7, -0.39923020337119111533},
    {0, 12.0, 0.047689310796833536624},   {0, 12.5, 0.14688405470042110231},
    {0, 33.3, 0.063338485947521251681},   {0, 50, 0.055812327669251815005},
    {1, 1.0, 0.44005058574493351596},     {1, 7.25, 0.068581700653131744531},
    {1, 49.9, -0.1027969573688854436},    {2.5, 4.2, 0.41795698189048107094},
    {3, 20, -0.098901394560449675613},    {0.3, 9.9, -0.17851060175591093178},
    {7.5, 11, 0.13343065397599013149},    {10, 0.7, 7.5175911502153906342e-12},
    {10, 14.475, 0.000089735848664947583827}, {10, 20, 0.18648255802394508321},
    {10, 35, 0.063546391343962840494},    {10, 50, -0.11384784914946938567},
    {4.6, 5.0, 0.31969761468511846933},   {1.5, 30, -0.027267945711177687796},
};

}  // namespace

TEST_CASE("bessel_j trivial values") {
  CHECK(bessel_j(0, 0) == 1.0);
  CHECK(bessel_j(1, 0) == 0.0);
  CHECK(bessel_j(2.5, 0) == 0.0);
}

TEST_CASE("bessel_j half order matches the elementary closed form") {
  for (double x : {1.0, 2.0, 5.0, 0.1, 4.99, 5.01, 17.0, 42.0}) {
    const double expected = std::sqrt(2.0 / (std::numbers::pi * x)) * std::sin(x);
    CHECK(std::abs(bessel_j(0.5, x) - expected) <= 1e-12);
  }
  // J_{3/2}(x) = sqrt(2/(pi x)) (sin x / x - cos x)
  for (double x : {0.7, 3.0, 9.0, 31.0}) {
    const double expected =
        std::sqrt(2.0 / (std::numbers::pi * x)) * (std::sin(x) / x - std::cos(x));
    CHECK(std::abs(bessel_j(1.5, x) - expected) <= 1e-12);
  }
}

TEST_CASE("bessel_j agrees with high-precision reference values") {
  for (const auto& r : kReference) {
    INFO("nu=" << r.nu << " x=" << r.x);
    CHECK(std::abs(bessel_j(r.nu, r.x) - r.value) <= 1e-12);
  }
}

TEST_CASE("bessel_j rejects invalid arguments") {
  CHECK_THROWS_AS(bessel_j(0, -1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(-0.5, 1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(0, std::nan("")), DomainError);
}

TEST_CASE("derivative identity J0' = -J1") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(1e-3, 20.0);
  const double delta = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double x = dist(rng);
    const double fd = (bessel_j(0, x + delta) - bessel_j(0, x - delta)) / (2 * delta);
    CHECK(std::abs(fd + bessel_j(1, x)) <= 1e-6);
    CHECK(std::abs(bessel_j_prime(0, x) + bessel_j(1, x)) <= 1e-15);
  }
}

TEST_CASE("bessel_zero reference values") {
  CHECK(bessel_zero(0, 1) == doctest::Approx(2.404825557695773).epsilon(1e-15));
  CHECK(bessel_zero(0, 2) == doctest::Approx(5.520078110286311).epsilon(1e-15));
  CHECK(bessel_zero(0.5, 1) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(bessel_zero(1, 1) == doctest::Approx(3.8317059702075123156).epsilon(1e-14));
  CHECK(bessel_zero(1, 2) == doctest::Approx(7.0155866698156187535).epsilon(1e-14));
  CHECK(bessel_zero(2.5, 3) == doctest::Approx(12.322940970566582052).epsilon(1e-14));
  CHECK(bessel_zero(10, 1) == doctest::Approx(14.475500686554541238).epsilon(1e-14));
  CHECK(bessel_zero(10, 20) == doctest::Approx(77.106734246861295048).epsilon(1e-14));
  CHECK(bessel_zero(0, 20) == doctest::Approx(62.048469190227169883).epsilon(1e-14));
  CHECK(j01() == bessel_zero(0, 1));
}

TEST_CASE("bessel_zero brute-force bisection oracle") {
  const auto bisect = [](double nu, double a, double b) {
    double fa = bessel_j(nu, a);
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b);
      const double fm = bessel_j(nu, m);
      if ((fm > 0) == (fa > 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  CHECK(std::abs(bessel_zero(0, 1) - bisect(0, 2, 3)) <= 1e-14);
  CHECK(std::abs(bessel_zero(0, 2) - bisect(0, 5, 6)) <= 1e-14);
}

TEST_CASE("bessel_zero postconditions and interlacing over the supported range") {
  for (int inu = 0; inu <= 20; ++inu) {
    const double nu = 0.5 * inu;
    double previous = 0.0;
    for (int m = 1; m <= 20; ++m) {
      const double z = bessel_zero(nu, m);
      CHECK(std::abs(bessel_j(nu, z)) <= 1e-11);
      CHECK(z > previous);
      // Count sign changes below z on a fine grid: exactly m - 1.
      if (m <= 3) {
        int changes = 0;
        double prev = bessel_j(nu, nu + 1e-9);
        for (double x = nu + 0.01; x < z - 1e-6; x += 0.01) {
          const double v = bessel_j(nu, x);
          if ((v > 0) != (prev > 0)) ++changes;
          prev = v;
        }
        CHECK(changes == m - 1);
      }
      if (nu + 1 <= 10) {
        const double next_order = bessel_zero(nu + 1, m);
        CHECK(z < next_order);
        CHECK(next_order < bessel_zero(nu, m + 1));
      }
      previous = z;
    }
  }
}

TEST_CASE("bessel_zero rejects invalid arguments") {
  CHECK_THROWS_AS(bessel_zero(0, 0), DomainError);
  CHECK_THROWS_AS(bessel_zero(-1, 1), DomainError);
}

TEST_CASE("gauss_legendre invariants") {
  for (int n : {1, 2, 3, 4, 7, 16, 33, 100, 255, 256}) {
    INFO("n=" << n);
    const auto rule = gauss_legendre(n);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
    double wsum = 0;
    for (int i = 0; i < n; ++i) {
      CHECK(rule.weights[i] > 0);
      wsum += rule.weights[i];
      CHECK(std::abs(rule.nodes[i] + rule.nodes[n - 1 - i]) <= 1e-14);
      if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
    }
    CHECK(std::abs(wsum - 2.0) <= 1e-14);
    // Exact for monomials up to degree 2n - 1 (capped to keep x^d well scaled).
    for (int d = 0; d <= std::min(2 * n - 1, 60); ++d) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], d);
      const double exact = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
      CHECK(std::abs(s - exact) <= 1e-12 * std::max(1.0, exact));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), DomainError);
  CHECK_THROWS_AS(gauss_legendre(257), DomainError);
}

TEST_CASE("gauss_legendre small rules") {
  const auto one = gauss_legendre(1);
  CHECK(one.nodes[0] == 0.0);
  CHECK(one.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
  const auto sq = [](double x) { return x * x; };
  CHECK(integrate(sq, -1, 1, gauss_legendre(2), 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const auto x6 = [](double x) { return std::pow(x, 6); };
  CHECK(std::abs(integrate(x6, -1, 1, gauss_legendre(4), 1) - 2.0 / 7.0) <= 1e-14);
}

TEST_CASE("composite integration") {
  const auto rule8 = gauss_legendre(8);
  CHECK(integrate([](double) { return 1.0; }, 0, 1, rule8, 1) == doctest::Approx(1.0));
  CHECK(std::abs(integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi, rule8, 4) -
                 2.0) <= 1e-12);
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 1, 0, rule8, 1), DomainError);

  try {
    integrate([](double x) { return x > 0.5 ? std::nan("") : 1.0; }, 0, 1, rule8, 2);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.abscissa() > 0.5);
  }
}

TEST_CASE("classical Bessel relation: integral of t(J0^2 - J1^2) over [0, j01] vanishes") {
  const auto f = [](double t) {
    const double a = bessel_j(0, t);
    const double b = bessel_j(1, t);
    return t * (a * a - b * b);
  };
  CHECK(std::abs(integrate(f, 0, j01(), gauss_legendre(16), 8)) <= 1e-10);
}

TEST_CASE("composite quadrature converges on J0(2 j01 x)^2") {
  const double j = j01();
  const auto f = [j](double x) {
    const double v = bessel_j(0, 2 * j * x);
    return v * v;
  };
  const auto rule = gauss_legendre(2);
  const double exact = integrate(f, 0, 0.5, gauss_legendre(32), 16);
  double previous_error = std::abs(integrate(f, 0, 0.5, rule, 1) - exact);
  for (int panels = 2; panels <= 256; panels *= 2) {
    const double error = std::abs(integrate(f, 0, 0.5, rule, panels) - exact);
    if (previous_error < 1e-13) break;
    CHECK(error * 4 <= previous_error);
    previous_error = error;
  }
}
