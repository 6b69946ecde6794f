#include "flatspec/explicit_bound.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "flatspec/errors.hpp"
#include "flatspec/fem2d.hpp"
#include "flatspec/specfun.hpp"

namespace flatspec::explicit_bound {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

double j0sq(double x) {
  const double v = specfun::bessel_j(0, 2 * specfun::j01() * x);
  return v * v;
}

double j1sq(double x) {
  const double v = specfun::bessel_j(1, 2 * specfun::j01() * x);
  return v * v;
}

const specfun::QuadratureRule& rule16() {
  static const auto rule = specfun::gauss_legendre(16);
  return rule;
}

// Integral over [0, 1/2] of F(x, h(x)), split at h's corners and the root of g
// so every piece is smooth; 64 panels over the full interval.
double integrate_against(const ConcaveH& h, const std::function<double(double, double)>& F) {
  std::vector<double> cuts = h.breakpoints;
  const double x0 = g_root();
  if (std::none_of(cuts.begin(), cuts.end(), [&](double t) { return std::abs(t - x0) < 1e-14; })) {
    cuts.insert(std::upper_bound(cuts.begin(), cuts.end(), x0), x0);
  }
  return specfun::integrate_pieces([&](double x) { return F(x, h(x)); }, cuts, rule16(), 128.0);
}

// Profile with h(0) = h0 and the given slopes on the given pieces, rescaled so
// h(1/2) = 1 and clipped at 1. Empty when the slopes do not rise overall.
std::optional<ConcaveH> build_profile(double h0, const std::vector<double>& knots, std::vector<double> slopes) {
  std::sort(slopes.begin(), slopes.end(), std::greater<>());
  std::vector<double> rise{0.0};
  for (std::size_t i = 0; i < slopes.size(); ++i) rise.push_back(rise.back() + slopes[i] * (knots[i + 1] - knots[i]));
  if (!(rise.back() > 1e-9)) return std::nullopt;
  ConcaveH h;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double v = h0 + (1.0 - h0) * rise[i] / rise.back();
    if (i > 0) {
      const double prev = h0 + (1.0 - h0) * rise[i - 1] / rise.back();
      if ((prev - 1.0) * (v - 1.0) < 0.0) {
        const double t = knots[i - 1] + (1.0 - prev) / (v - prev) * (knots[i] - knots[i - 1]);
        if (t > h.breakpoints.back() + 1e-12 && t < knots[i] - 1e-12) {
          h.breakpoints.push_back(t);
          h.values.push_back(1.0);
        }
      }
    }
    h.breakpoints.push_back(knots[i]);
    h.values.push_back(std::min(v, 1.0));
  }
  h.values.back() = 1.0;
  return h;
}

struct Parameters {
  double h0 = 0.0;
  std::vector<double> knots;
  std::vector<double> slopes;
};

Parameters random_parameters(std::mt19937_64& rng, int max_pieces) {
  std::uniform_int_distribution<int> pieces(1, max_pieces);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Parameters par;
  const int m = pieces(rng);
  par.knots = {0.0, 0.5};
  while (static_cast<int>(par.knots.size()) < m + 1) {
    const double t = 0.5 * u(rng);
    if (std::all_of(par.knots.begin(), par.knots.end(), [&](double s) { return std::abs(s - t) > 1e-6; })) {
      par.knots.insert(std::upper_bound(par.knots.begin(), par.knots.end(), t), t);
    }
  }
  par.h0 = u(rng) < 0.25 ? 0.0 : u(rng);
  for (int i = 0; i < m; ++i) par.slopes.push_back(-2.0 + 6.0 * u(rng));
  return par;
}

}  // namespace

double ConcaveH::operator()(double x) const {
  if (x <= breakpoints.front()) return values.front();
  if (x >= breakpoints.back()) return values.back();
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  const double s = (x - breakpoints[i]) / (breakpoints[i + 1] - breakpoints[i]);
  return values[i] + s * (values[i + 1] - values[i]);
}

void ConcaveH::validate(bool normalized) const {
  const std::size_t n = breakpoints.size();
  if (n < 2 || values.size() != n) throw DomainError("ConcaveH: need matching breakpoints and values (at least two)");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 0.5) throw DomainError("ConcaveH: breakpoints must span [0, 1/2]");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) throw DomainError("ConcaveH: breakpoints must increase");
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("ConcaveH: values must lie in [0, 1]");
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double s = (breakpoints[i] - breakpoints[i - 1]) / (breakpoints[i + 1] - breakpoints[i - 1]);
    const double chord = values[i - 1] + s * (values[i + 1] - values[i - 1]);
    if (values[i] < chord - 1e-12) throw DomainError("ConcaveH: not concave");
  }
  if (normalized && std::abs(values.back() - 1.0) > 1e-12) throw DomainError("ConcaveH: need h(1/2) = 1");
}

ConcaveH ConcaveH::linear() { return {{0.0, 0.5}, {0.0, 1.0}}; }

ConcaveH ConcaveH::constant(double c) { return {{0.0, 0.5}, {c, c}}; }

ConcaveH ConcaveH::single_corner(double a, double v) {
  if (!(a > 0.0 && a < 0.5)) throw DomainError("single_corner: need 0 < a < 1/2");
  ConcaveH h{{0.0, a, 0.5}, {0.0, v, 1.0}};
  h.validate();
  return h;
}

ConcaveH ConcaveH::offset(double h0) {
  ConcaveH h{{0.0, 0.5}, {h0, 1.0}};
  h.validate();
  return h;
}

ConcaveH random_concave_h(std::mt19937_64& rng, int max_pieces) {
  if (max_pieces < 1) throw DomainError("random_concave_h: max_pieces must be positive");
  for (;;) {
    const auto par = random_parameters(rng, max_pieces);
    if (auto h = build_profile(par.h0, par.knots, par.slopes)) return *h;
  }
}

double g(double x) { return j0sq(x) - j1sq(x); }

double g_root() {
  static const double root = [] {
    double lo = 0.0, hi = 0.5;  // g(0) = 1, g(1/2) = -J_1(j01)^2
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

int g_sign_changes(int n) {
  if (n < 1) throw DomainError("g_sign_changes: need n >= 1");
  int changes = 0;
  double previous = g(0.5 / (n + 1));
  for (int i = 2; i <= n; ++i) {
    const double v = g(0.5 * i / (n + 1));
    if ((previous > 0.0) != (v > 0.0)) ++changes;
    previous = v;
  }
  return changes;
}

double bessel_integral(int p, const ConcaveH& h, int kind) {
  if (p < 0) throw DomainError("bessel_integral: p must be non-negative");
  if (kind != 0 && kind != 1) throw DomainError("bessel_integral: kind must be 0 or 1");
  h.validate(false);
  const auto bessel = kind == 0 ? j0sq : j1sq;
  return integrate_against(h, [&](double x, double hx) { return ipow(hx, p) * bessel(x); });
}

double psi(int p, const ConcaveH& h) {
  if (p < 0) throw DomainError("psi: p must be non-negative");
  h.validate(false);
  return integrate_against(h, [&](double x, double hx) { return ipow(hx, p) * g(x); });
}

double i00() {
  static const double value = bessel_integral(0, ConcaveH::constant(1.0), 0);
  return value;
}

double tau() {
  static const double value = specfun::j01() * specfun::j01() * psi(3, ConcaveH::linear()) / i00();
  return value;
}

double J_functional(const ConcaveH& h, double w) {
  if (!(w > 0.0 && w <= 1.0)) throw DomainError("J_functional: need w in (0, 1]");
  h.validate();
  const double t = tau(), a = 2 * t / 3 * w * w, b = t * t / 5 * ipow(w, 4);
  return integrate_against(h, [&](double x, double z) { return z * (1 + z * z * (a + b * z * z)) * g(x); });
}

double denominator(const ConcaveH& h, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("denominator: need w in [0, 1]");
  h.validate(false);
  const double t = tau(), a = 2 * t / 3 * w * w, b = t * t / 5 * ipow(w, 4);
  return integrate_against(h, [&](double x, double z) { return z * (1 + z * z * (a + b * z * z)) * j0sq(x); });
}

namespace {

struct LinearPsi {
  double psi3, psi5;
};

const LinearPsi& linear_psi() {
  static const LinearPsi v{psi(3, ConcaveH::linear()), psi(5, ConcaveH::linear())};
  return v;
}

}  // namespace

double Q(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("Q: need w in [0, 1]");
  const double t = tau(), j2 = specfun::j01() * specfun::j01(), w2 = w * w;
  const auto& lp = linear_psi();
  const double num = 2 * t / 3 * lp.psi3 + t * t / 5 * lp.psi5 * w2 - t * t / (3 * j2) * i00();
  return num / ((1 + 2 * t / 3 * w2 + t * t / 5 * w2 * w2) * i00());
}

double Q0_at(double t) {
  const double j2 = specfun::j01() * specfun::j01();
  return (2 * t / 3 * linear_psi().psi3 - t * t / (3 * j2) * i00()) / i00();
}

ConstantReport explicit_constant() {
  ConstantReport r;
  const double j2 = specfun::j01() * specfun::j01();
  r.I00 = i00();
  r.psi1 = psi(1, ConcaveH::linear());
  r.psi3 = linear_psi().psi3;
  r.psi5 = linear_psi().psi5;
  r.tau = tau();
  r.x0 = g_root();
  r.M = j2 * r.psi3 * r.psi3 / (3 * r.I00 * r.I00);
  r.constant = 4 * j2 * r.M;
  for (int i = 0; i <= 100; ++i) r.Q_samples.emplace_back(i / 100.0, Q(i / 100.0));
  return r;
}

bool tau_optimality() {
  const double t = tau(), best = Q0_at(t);
  for (double d : {0.01, 0.05, 0.1}) {
    if (!(best > Q0_at(t + d) && best > Q0_at(t - d))) return false;
  }
  return true;
}

MinimizerSearch minimizer_search(double w, int n_trials, unsigned long long seed) {
  if (!(w > 0.0 && w <= 1.0)) throw DomainError("minimizer_search: need w in (0, 1]");
  if (n_trials < 0) throw DomainError("minimizer_search: n_trials must be non-negative");
  MinimizerSearch out;
  out.J_linear = J_functional(ConcaveH::linear(), w);
  out.min_J = out.J_linear;
  out.argmin = ConcaveH::linear();
  out.argmin_description = "2x";
  out.structural_min_gap = std::numeric_limits<double>::infinity();

  auto consider = [&](const ConcaveH& h, const std::string& what) {
    const double J = J_functional(h, w);
    ++out.evaluations;
    if (J < out.min_J) {
      out.min_J = J;
      out.argmin = h;
      out.argmin_description = what;
    }
    return J;
  };

  const double x0 = g_root();
  for (int i = 1; i <= 9; ++i) {
    const double a = x0 * i / 10.0;
    for (int j = 1; j <= 5; ++j) {
      const double v = 2 * a + (1 - 2 * a) * j / 5.0;
      std::ostringstream what;
      what << "single corner a=" << a << " h(a)=" << v;
      out.structural_min_gap = std::min(out.structural_min_gap, consider(ConcaveH::single_corner(a, v), what.str()) - out.J_linear);
    }
  }
  for (double h0 : {0.01, 0.05, 0.1, 0.2, 0.5, 0.9}) {
    std::ostringstream what;
    what << "offset h(0)=" << h0;
    out.structural_min_gap = std::min(out.structural_min_gap, consider(ConcaveH::offset(h0), what.str()) - out.J_linear);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::pair<double, Parameters>> pool;
  for (int trial = 0; trial < n_trials; ++trial) {
    const auto par = random_parameters(rng, 16);
    const auto h = build_profile(par.h0, par.knots, par.slopes);
    if (!h) {
      --trial;
      continue;
    }
    pool.emplace_back(consider(*h, "random #" + std::to_string(trial)), par);
  }

  // Local descent from the best few random profiles.
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::normal_distribution<double> step(0.0, 1.0);
  const std::size_t starts = std::min<std::size_t>(pool.size(), 8);
  for (std::size_t s = 0; s < starts; ++s) {
    auto [best, par] = pool[s];
    double sigma = 0.2;
    for (int it = 0; it < 150 && sigma > 1e-4; ++it) {
      Parameters cand = par;
      cand.h0 = std::clamp(cand.h0 + sigma * step(rng), 0.0, 0.999);
      for (double& sl : cand.slopes) sl += 4 * sigma * step(rng);
      const auto h = build_profile(cand.h0, cand.knots, cand.slopes);
      if (!h) {
        sigma *= 0.7;
        continue;
      }
      const double J = consider(*h, "local search from start " + std::to_string(s));
      if (J < best) {
        best = J;
        std::sort(cand.slopes.begin(), cand.slopes.end(), std::greater<>());
        par = cand;
        sigma *= 1.2;
      } else {
        sigma *= 0.85;
      }
    }
  }
  out.gap_to_2x = out.min_J - out.J_linear;
  return out;
}

SymmetricBound verify_symmetric_bound(const geometry::ConvexPolygon& poly, double h_fem) {
  if (!geometry::symmetric_about_mediatrix(poly, 1e-9)) {
    throw DomainError("verify_symmetric_bound: polygon is not symmetric about the bisector of its diameter");
  }
  if (!(h_fem > 0.0 && h_fem <= 0.25)) throw DomainError("verify_symmetric_bound: need 0 < h_fem <= 1/4");
  const auto frame = geometry::diameter_frame(poly, true);
  SymmetricBound out;
  out.D = frame.original.length;
  out.w = geometry::width_orthogonal(poly, frame.original.direction);
  const double aspect = out.w / out.D;
  out.thin_path = aspect <= fem::ThinOptions{}.max_aspect * (1 + 1e-9);
  const auto eig = out.thin_path ? fem::neumann_eigs_thin(frame.polygon, 1, h_fem)
                                 : fem::neumann_eigs(frame.polygon, 1, h_fem);
  const double j2 = specfun::j01() * specfun::j01();
  out.lhs = eig.values[1] / (out.D * out.D);
  out.rhs = 4 * j2 / (out.D * out.D) - kStatedConstant * out.w * out.w / std::pow(out.D, 4);
  out.margin = out.rhs - out.lhs;
  return out;
}

void to_json(nlohmann::json& j, const ConcaveH& h) { j = {{"breakpoints", h.breakpoints}, {"values", h.values}}; }

void to_json(nlohmann::json& j, const ConstantReport& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [w, q] : r.Q_samples) samples.push_back({w, q});
  j = {{"I00", r.I00}, {"psi1", r.psi1}, {"psi3", r.psi3}, {"psi5", r.psi5}, {"tau", r.tau},
       {"x0", r.x0},   {"M", r.M},       {"constant", r.constant}, {"Q_samples", samples}};
}

void to_json(nlohmann::json& j, const MinimizerSearch& r) {
  j = {{"min_J", r.min_J},         {"argmin", r.argmin},     {"argmin_description", r.argmin_description},
       {"J_linear", r.J_linear},   {"gap_to_2x", r.gap_to_2x}, {"structural_min_gap", r.structural_min_gap},
       {"evaluations", r.evaluations}};
}

void to_json(nlohmann::json& j, const SymmetricBound& r) {
  j = {{"D", r.D}, {"w", r.w}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"margin", r.margin}, {"thin_path", r.thin_path}};
}

}  // namespace flatspec::explicit_bound
