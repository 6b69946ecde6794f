// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "flatspec/explicit_bound.hpp"
#include "flatspec/fem2d.hpp"
#include "flatspec/geometry.hpp"
#include "flatspec/harness.hpp"
#include "flatspec/mesh.hpp"
#include "flatspec/profile_weight.hpp"
#include "flatspec/specfun.hpp"
#include "flatspec/sturm.hpp"

using namespace flatspec;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Runs f(i) for i < n on all cores, results in index order.
template <class F>
auto parallel_for(int n, F f) {
  using R = decltype(f(0));
  std::vector<std::future<R>> futures;
  std::vector<R> out;
  const int width = std::max(1u, std::thread::hardware_concurrency());
  for (int start = 0; start < n; start += width) {
    futures.clear();
    for (int i = start; i < std::min(n, start + width); ++i) futures.push_back(std::async(std::launch::async, f, i));
    for (auto& fu : futures) out.push_back(fu.get());
  }
  return out;
}

Outcome constants() {
  const auto r = explicit_bound::explicit_constant();
  const bool ok = std::abs(r.tau + 0.569) <= 0.005 && std::abs(r.M - 0.0186) <= 5e-4 && std::abs(r.constant - 0.432) <= 0.003;
  return {ok, fmt("tau=%.6f M=%.6f 4j01^2M=%.6f", r.tau, r.M, r.constant)};
}

Outcome bessel_identity() {
  const double psi1 = explicit_bound::psi(1, explicit_bound::ConcaveH::linear());
  const double j01 = specfun::j01();
  const double direct = specfun::integrate(
      [](double t) {
        const double a = specfun::bessel_j(0, t), b = specfun::bessel_j(1, t);
        return t * (a * a - b * b);
      },
      0.0, j01, specfun::gauss_legendre(20), 64);
  const bool ok = std::abs(psi1) <= 1e-10 && std::abs(direct) <= 1e-10;
  return {ok, fmt("psi(1,2x)=%.2e integral=%.2e", psi1, direct)};
}

Outcome kroger() {
  const auto t = harness::kroger_table(5, 5, 2048, 0);
  int checked = 0;
  for (const auto& c : t.cells) checked += !std::isnan(c.computed);
  const bool ok = t.violations.empty() && t.max_rel_error <= 1e-3;
  return {ok, fmt("%d cells cross-checked, max rel error %.2e", checked, t.max_rel_error)};
}

Outcome oracles() {
  const double pi2 = pi * pi;
  const double jp11 = 1.8411837813406593;  // first zero of J_1'
  const auto sq = fem::neumann_eigs(geometry::rectangle(1.0, 1.0), 2, 0.02);
  const auto disk = fem::neumann_eigs(geometry::regular_polygon(256, 1.0), 1, 0.02);
  const double e1 = rel(sq.values[1], pi2), e2 = rel(sq.values[2], pi2), e3 = rel(disk.values[1], jp11 * jp11);
  const bool ok = e1 <= 0.01 && e2 <= 0.01 && e3 <= 0.01;
  return {ok, fmt("square %.3e %.3e, disk %.3e relative", e1, e2, e3)};
}

Outcome strictness() {
  const auto random = harness::estimate_c(1, harness::Family::random, 200, 0.02, 2024, 0);
  const auto tri = harness::estimate_c(1, harness::Family::triangles, 40, 0.02, 2024, 0);
  std::size_t bad = 0;
  double worst = 1e300;
  for (const auto* e : {&random, &tri}) {
    for (const auto& r : e->rows) {
      bad += !(r.mu < r.bound);
      worst = std::min(worst, r.deficit);
    }
  }
  const bool ok = bad == 0 && random.rows.size() == 200;
  return {ok, fmt("%zu domains, %zu violations, smallest deficit %.4f", random.rows.size() + tri.rows.size(), bad, worst)};
}

Outcome symmetric_bound() {
  const auto family = harness::make_family(harness::Family::symmetric, 50, 77);
  const auto results =
      parallel_for(50, [&](int i) { return explicit_bound::verify_symmetric_bound(family[i].second, 0.02); });
  double worst = 1e300;
  int thin = 0;
  for (const auto& r : results) {
    worst = std::min(worst, r.margin);
    thin += r.thin_path;
  }
  return {worst >= 0.0, fmt("50 domains (%d thin), smallest margin %.4e", thin, worst)};
}

Outcome sandwich() {
  std::vector<double> alphas;
  for (int i = 1; i <= 20; ++i) alphas.push_back(1.0 / 3.0 + (2.0 / 3.0) * i / 21.0);
  const auto s = harness::sharpness_sweep(alphas, 0.01, 0);
  double lo = 1e300, hi = 0.0;
  const double bound = 4 * specfun::j01() * specfun::j01();
  bool ok = s.rows.size() == 20;
  for (const auto& r : s.rows) {
    const double ratio = r.mu / bound;
    const double floor = std::pow(std::sin(r.alpha * pi / 2), 2);
    ok = ok && floor <= ratio && ratio < 1.0;
    lo = std::min(lo, ratio - floor);
    hi = std::max(hi, ratio);
  }
  return {ok, fmt("min(ratio - sin^2) %.3e, max ratio %.6f", lo, hi)};
}

Outcome sharpness() {
  const auto s = harness::sharpness_sweep(harness::alphas_for_widths(0.02, 0.2, 12), 0.001, 0);
  const bool ok = s.fitted >= 3 && s.slope >= 1.8 && s.slope <= 2.2;
  return {ok, fmt("slope %.4f over %d widths", s.slope, s.fitted)};
}

Outcome minimizer() {
  bool ok = true;
  std::string detail;
  for (double w : {0.25, 0.5, 1.0}) {
    const auto r = explicit_bound::minimizer_search(w, 2000, 11);
    ok = ok && r.min_J >= r.J_linear - 1e-8 && r.structural_min_gap >= -1e-8;
    detail += fmt("w=%.2f gap %.2e structural %.2e; ", w, r.gap_to_2x, r.structural_min_gap);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome q_monotone() {
  const auto r = explicit_bound::explicit_constant();
  int first_drop = -1;
  for (std::size_t i = 1; i < r.Q_samples.size(); ++i) {
    if (r.Q_samples[i].second < r.Q_samples[i - 1].second) {
      first_drop = static_cast<int>(i);
      break;
    }
  }
  const bool q0 = rel(r.Q_samples.front().second, r.M) <= 1e-10;
  const bool tau_ok = explicit_bound::tau_optimality();
  const bool ok = first_drop < 0 && q0 && tau_ok;
  std::string detail = first_drop < 0 ? std::string("nondecreasing")
                                      : fmt("decreases at w=%.2f (%.8f -> %.8f)", r.Q_samples[first_drop - 1].first,
                                            r.Q_samples[first_drop - 1].second, r.Q_samples[first_drop].second);
  detail += fmt(", Q(0)=M %s, tau optimal %s", q0 ? "yes" : "no", tau_ok ? "yes" : "no");
  return {ok, detail};
}

Outcome geometry_sandwich() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int low = 0, high = 0, sections = 0, bad_sections = 0;
  double rmin = 1e300, rmax = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto poly = geometry::random_convex_polygon(rng, 6 + i % 20, 0.05 + 0.95 * u(rng));
    const auto f = geometry::flatness(poly);
    low += !(f.a2 <= f.w + 1e-9 * f.D);
    high += !(f.w <= 2 * f.a2 + 1e-9 * f.D);
    rmin = std::min(rmin, f.w / f.a2);
    rmax = std::max(rmax, f.w / f.a2);
    const auto frame = geometry::diameter_frame(poly, true);
    for (int j = 1; j < 10; ++j) {
      const double x1 = j / 10.0;
      const auto [lo, hi] = geometry::vertical_section(frame.polygon, x1);
      const double p = hi - lo;
      if (p <= 0.0) continue;
      ++sections;
      bad_sections += std::abs(geometry::section_moment(frame.polygon, x1).m2 / (p * p * p) - 1.0 / 12.0) > 1e-9;
    }
  }
  const bool ok = low == 0 && high == 0 && bad_sections == 0;
  return {ok, fmt("a2<=w fails %d, w<=2a2 fails %d of 200 (w/a2 in [%.3f, %.3f]); m2/p^3 off on %d of %d sections", low,
                  high, rmin, rmax, bad_sections, sections)};
}

Outcome invariants() {
  std::mt19937_64 rng(99);
  int bad = 0;
  double worst_scale = 0.0, worst_reflect = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = sturm::random_concave_weight(rng, 2 + trial % 4);
    std::vector<double> previous;
    for (int n = 64; n <= 1024; n *= 2) {
      const auto r = sturm::sl_eigs(w, 3, n);
      if (!previous.empty()) {
        for (int j = 1; j <= 3; ++j) bad += r.values[j] > previous[j] * (1 + 1e-12);
      }
      previous = r.values;
    }
    auto scaled = w;
    for (auto& q : scaled.q_values) q *= 0.37;
    const auto base = sturm::sl_eigs(w, 3, 512);
    const auto s = sturm::sl_eigs(scaled, 3, 512);
    const auto m = sturm::sl_eigs(w.reflected(), 3, 512);
    for (int j = 1; j <= 3; ++j) {
      worst_scale = std::max(worst_scale, rel(s.values[j], base.values[j]));
      worst_reflect = std::max(worst_reflect, rel(m.values[j], base.values[j]));
    }
  }
  int bad2 = 0;
  for (const auto& poly : {geometry::rectangle(1.0, 1.0), geometry::unit_base_triangle(0.6 * pi), geometry::regular_polygon(7, 1.0)}) {
    auto mesh = fem::mesh_polygon(poly, 0.15 * geometry::diameter(poly).length);
    std::vector<double> previous;
    for (int level = 0; level < 3; ++level) {
      const auto r = fem::neumann_eigs(mesh, 3);
      if (!previous.empty()) {
        for (int j = 1; j <= 3; ++j) bad2 += r.values[j] > previous[j] * (1 + 1e-10);
      }
      previous = r.values;
      mesh = fem::refine_uniform(mesh);
    }
  }
  const bool ok = bad == 0 && bad2 == 0 && worst_scale <= 1e-10 && worst_reflect <= 1e-10;
  return {ok, fmt("refinement increases: 1-D %d, 2-D %d; scaling %.1e, reflection %.1e relative", bad, bad2, worst_scale,
                  worst_reflect)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"explicit constants", constants},
      {"Bessel identity", bessel_identity},
      {"Kroger table", kroger},
      {"FEM oracles", oracles},
      {"Kroger strictness", strictness},
      {"explicit symmetric bound", symmetric_bound},
      {"triangle sandwich", sandwich},
      {"exponent sharpness", sharpness},
      {"concave minimizer", minimizer},
      {"Q monotonicity", q_monotone},
      {"width sandwich and section moments", geometry_sandwich},
      {"solver invariants", invariants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
