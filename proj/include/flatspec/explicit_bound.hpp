#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flatspec/geometry.hpp"

/// The explicit constant in mu_1(Omega) <= 4 j01^2 / D^2 - c w^2 / D^4 for
/// convex domains symmetric about the perpendicular bisector of a diameter.
/// The bound comes from the test function f(x)(1 + tau y^2), with f the tent
/// eigenfunction, and reduces to one-dimensional Bessel-weighted integrals
/// over [0, 1/2] of the normalized half-profile h.
namespace flatspec::explicit_bound {

/// Concave piecewise-linear h on [0, 1/2] with values in [0, 1].
struct ConcaveH {
  std::vector<double> breakpoints;  // 0 = t_0 < ... < t_M = 1/2
  std::vector<double> values;

  double operator()(double x) const;

  /// Throws DomainError unless the breakpoints span [0, 1/2] increasingly,
  /// values lie in [0, 1] and second differences are <= 1e-12. With
  /// `normalized`, also requires h(1/2) = 1.
  void validate(bool normalized = true) const;

  static ConcaveH linear();  // h(x) = 2x, the minimizer
  static ConcaveH constant(double c);
  /// h(0) = 0, h(a) = v, h(1/2) = 1; concave iff v >= 2a.
  static ConcaveH single_corner(double a, double v);
  /// h(x) = h0 + (1 - h0) 2x.
  static ConcaveH offset(double h0);
};

/// Random normalized profile: decreasing random slopes on up to max_pieces
/// pieces, integrated from a random h(0) in [0, 1), rescaled so h(1/2) = 1
/// and clipped at 1.
ConcaveH random_concave_h(std::mt19937_64& rng, int max_pieces = 16);

/// g(x) = J_0(2 j01 x)^2 - J_1(2 j01 x)^2.
double g(double x);
/// The single zero of g on (0, 1/2), cached.
double g_root();
/// Sign changes of g on a uniform grid of n interior points of (0, 1/2).
int g_sign_changes(int n);

/// I_{p,kind}(h) = integral over [0, 1/2] of h^p J_kind(2 j01 x)^2, by
/// 16-point Gauss-Legendre on 64 panels split at h's breakpoints and at the
/// root of g. Accepts unnormalized h (h = 0 is allowed).
double bessel_integral(int p, const ConcaveH& h, int kind);
/// I_{p,0}(h) - I_{p,1}(h).
double psi(int p, const ConcaveH& h);

/// I_{0,0} = integral of J_0(2 j01 x)^2 over [0, 1/2], cached.
double i00();
/// tau = j01^2 psi(3, 2x) / I_{0,0}, cached.
double tau();

/// J(h) = psi(1,h) + (2 tau/3) psi(3,h) w^2 + (tau^2/5) psi(5,h) w^4, for w in (0, 1].
double J_functional(const ConcaveH& h, double w);
/// Denominator of the Rayleigh quotient: I_{1,0} + (2 tau/3) w^2 I_{3,0} + (tau^2/5) w^4 I_{5,0}.
double denominator(const ConcaveH& h, double w);

/// Lower bound Q(w) for the normalized deficit at width w in [0, 1].
double Q(double w);
/// Q(0) as a function of the free parameter in the test function.
double Q0_at(double tau_value);

struct ConstantReport {
  double I00 = 0.0;
  double psi1 = 0.0;
  double psi3 = 0.0;
  double psi5 = 0.0;
  double tau = 0.0;
  double x0 = 0.0;
  double M = 0.0;
  double constant = 0.0;  // 4 j01^2 M
  std::vector<std::pair<double, double>> Q_samples;  // (w, Q(w)) on 101 points of [0, 1]
};

ConstantReport explicit_constant();

/// True iff Q0_at(tau()) exceeds Q0_at(tau() +- delta) for delta in {0.01, 0.05, 0.1}.
bool tau_optimality();

struct MinimizerSearch {
  double min_J = 0.0;
  ConcaveH argmin;
  std::string argmin_description;
  double J_linear = 0.0;  // J(2x)
  double gap_to_2x = 0.0;  // min_J - J(2x)
  double structural_min_gap = 0.0;  // smallest J - J(2x) over the single-corner and offset families
  int evaluations = 0;
};

/// Random profiles, the single-corner and offset families, and a local
/// search from the best random ones. Seeded and deterministic.
MinimizerSearch minimizer_search(double w, int n_trials, unsigned long long seed);

/// Three-digit value of the constant used in the bound; explicit_constant()
/// gives 0.43203.
inline constexpr double kStatedConstant = 0.432;

struct SymmetricBound {
  double D = 0.0;
  double w = 0.0;
  double lhs = 0.0;     // mu_1 from the finite element solver
  double rhs = 0.0;     // 4 j01^2 / D^2 - 0.432 w^2 / D^4
  double margin = 0.0;  // rhs - lhs
  bool thin_path = false;
};

/// Checks the bound on a polygon symmetric about the perpendicular bisector of
/// its diameter (vertex-reflection tolerance 1e-9; DomainError otherwise).
/// h_fem is the mesh size relative to the diameter. Flat polygons (aspect
/// <= 0.2) use the thin-domain path.
SymmetricBound verify_symmetric_bound(const geometry::ConvexPolygon& poly, double h_fem);

void to_json(nlohmann::json& j, const ConcaveH& h);
void to_json(nlohmann::json& j, const ConstantReport& r);
void to_json(nlohmann::json& j, const MinimizerSearch& r);
void to_json(nlohmann::json& j, const SymmetricBound& r);

}  // namespace flatspec::explicit_bound
