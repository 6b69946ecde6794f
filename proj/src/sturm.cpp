#include "flatspec/sturm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "flatspec/errors.hpp"
#include "flatspec/specfun.hpp"

namespace flatspec::sturm {

namespace {

constexpr double pi = std::numbers::pi;

// Hierarchical P2 pencil: vertex hats couple tridiagonally, and the bubble
// 4t(1-t) of element e couples only with vertices e and e+1.
struct Pencil {
  std::vector<double> k_diag, k_off, m_diag, m_off;  // vertex block
  std::vector<double> k_bb, m_bb;                    // bubble diagonal
  std::vector<double> k_lb, k_rb, m_lb, m_rb;        // bubble e with vertex e / e+1
  std::size_t vertices() const { return k_diag.size(); }
  std::size_t elements() const { return k_bb.size(); }
};

Pencil assemble(const ProfileWeight& weight, int n_elems) {
  const std::size_t n = static_cast<std::size_t>(n_elems);
  const double h = 1.0 / n_elems;
  // p is piecewise of degree dim - 1, the mass integrand of degree dim + 3.
  const auto rule = specfun::gauss_legendre((weight.dim + 4) / 2 + 1);

  Pencil pen;
  pen.k_diag.assign(n + 1, 0.0);
  pen.m_diag.assign(n + 1, 0.0);
  pen.k_off.assign(n, 0.0);
  pen.m_off.assign(n, 0.0);
  for (auto* v : {&pen.k_bb, &pen.m_bb, &pen.k_lb, &pen.k_rb, &pen.m_lb, &pen.m_rb}) v->assign(n, 0.0);

  std::size_t next_break = 1;
  std::vector<double> cuts;
  for (std::size_t e = 0; e < n; ++e) {
    const double a = static_cast<double>(e) * h;
    const double b = e + 1 == n ? 1.0 : static_cast<double>(e + 1) * h;
    cuts.assign(1, a);
    while (next_break < weight.breakpoints.size() && weight.breakpoints[next_break] <= a) ++next_break;
    for (std::size_t i = next_break; i < weight.breakpoints.size() && weight.breakpoints[i] < b; ++i) {
      cuts.push_back(weight.breakpoints[i]);
    }
    cuts.push_back(b);

    std::array<std::array<double, 3>, 3> ke{}, me{};
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double s = cuts[c], t = cuts[c + 1];
      // q is affine on [s, t]; evaluate it at the ends once.
      const double qs = weight.q(s);
      const double qt = weight.q(t);
      const double half = 0.5 * (t - s);
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        const double z = rule.nodes[g];
        const double x = s + half * (z + 1.0);
        const double qx = qs + 0.5 * (z + 1.0) * (qt - qs);
        double px = 1.0;
        for (int i = 1; i < weight.dim; ++i) px *= qx;
        const double wt = rule.weights[g] * half * px;
        const double r = (x - a) / h;
        const std::array<double, 3> phi{1.0 - r, r, 4.0 * r * (1.0 - r)};
        const std::array<double, 3> dphi{-1.0 / h, 1.0 / h, 4.0 * (1.0 - 2.0 * r) / h};
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            ke[i][j] += wt * dphi[i] * dphi[j];
            me[i][j] += wt * phi[i] * phi[j];
          }
        }
      }
    }
    pen.k_diag[e] += ke[0][0];
    pen.k_diag[e + 1] += ke[1][1];
    pen.k_off[e] += ke[0][1];
    pen.m_diag[e] += me[0][0];
    pen.m_diag[e + 1] += me[1][1];
    pen.m_off[e] += me[0][1];
    pen.k_bb[e] = ke[2][2];
    pen.m_bb[e] = me[2][2];
    pen.k_lb[e] = ke[0][2];
    pen.k_rb[e] = ke[1][2];
    pen.m_lb[e] = me[0][2];
    pen.m_rb[e] = me[1][2];
  }
  for (std::size_t i = 0; i <= n; ++i) {
    if (!(pen.m_diag[i] > 0.0) || (i < n && !(pen.m_bb[i] > 0.0))) {
      std::ostringstream msg;
      msg << "sturm: mass matrix is singular (weight vanishes around node " << i << ")";
      throw DomainError(msg.str());
    }
  }
  return pen;
}

// K - lambda M with the bubbles eliminated: the tridiagonal Schur complement on
// the vertices plus the bubble pivots.
struct Condensed {
  std::vector<double> diag, off, bubble, left, right;
};

Condensed condense(const Pencil& pen, double lambda, double pivmin) {
  const std::size_t n = pen.elements();
  Condensed c;
  c.diag.resize(n + 1);
  c.off.resize(n);
  c.bubble.resize(n);
  c.left.resize(n);
  c.right.resize(n);
  for (std::size_t i = 0; i <= n; ++i) c.diag[i] = pen.k_diag[i] - lambda * pen.m_diag[i];
  for (std::size_t e = 0; e < n; ++e) {
    double ab = pen.k_bb[e] - lambda * pen.m_bb[e];
    if (std::abs(ab) < pivmin) ab = -pivmin;
    const double l = pen.k_lb[e] - lambda * pen.m_lb[e];
    const double r = pen.k_rb[e] - lambda * pen.m_rb[e];
    c.bubble[e] = ab;
    c.left[e] = l;
    c.right[e] = r;
    c.diag[e] -= l * l / ab;
    c.diag[e + 1] -= r * r / ab;
    c.off[e] = pen.k_off[e] - lambda * pen.m_off[e] - l * r / ab;
  }
  return c;
}

// Number of eigenvalues of the pencil strictly below lambda: Sylvester inertia,
// additive over the bubble block and its Schur complement.
std::size_t count_below(const Pencil& pen, double lambda, double pivmin) {
  const Condensed c = condense(pen, lambda, pivmin);
  std::size_t count = 0;
  for (double ab : c.bubble) count += ab < 0.0 ? 1 : 0;
  double d = 0.0;
  for (std::size_t i = 0; i < c.diag.size(); ++i) {
    double a = c.diag[i];
    if (i > 0) a -= c.off[i - 1] * c.off[i - 1] / d;
    d = std::abs(a) < pivmin ? -pivmin : a;
    if (d < 0.0) ++count;
  }
  return count;
}

double pivot_floor(const Pencil& pen) {
  double mx = 0.0;
  for (double v : pen.k_diag) mx = std::max(mx, std::abs(v));
  for (double v : pen.m_diag) mx = std::max(mx, std::abs(v));
  return std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon() + 1e-300 * mx;
}

// Eigenvalues with indices in [first, last] by bisection.
std::vector<double> bisect(const Pencil& pen, int first, int last) {
  const double pivmin = pivot_floor(pen);
  double hi = 1.0;
  while (count_below(pen, hi, pivmin) < static_cast<std::size_t>(last + 1)) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw ConvergenceError("sturm: could not bracket the spectrum");
  }
  const double top = hi;
  std::vector<double> out;
  for (int j = first; j <= last; ++j) {
    double lo = -1e-3 * top;
    double up = top;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + up);
      if (mid <= lo || mid >= up) break;
      if (up - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(up)) ||
          up - lo <= 1e-15 * top) {
        break;
      }
      if (count_below(pen, mid, pivmin) >= static_cast<std::size_t>(j + 1)) {
        up = mid;
      } else {
        lo = mid;
      }
    }
    out.push_back(0.5 * (lo + up));
  }
  return out;
}

// Solves the tridiagonal system (sub, diag, super) x = b in place with partial
// pivoting; exact zero pivots are replaced by `tiny` (shifts sit on eigenvalues).
void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& b, double tiny) {
  const std::size_t n = diag.size();
  std::vector<double> sup2(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(diag[i]) >= std::abs(sub[i])) {
      if (diag[i] == 0.0) diag[i] = tiny;
      const double fact = sub[i] / diag[i];
      diag[i + 1] -= fact * sup[i];
      b[i + 1] -= fact * b[i];
    } else {
      const double fact = diag[i] / sub[i];
      diag[i] = sub[i];
      const double temp = diag[i + 1];
      diag[i + 1] = sup[i] - fact * temp;
      if (i + 2 < n) {
        sup2[i] = sup[i + 1];
        sup[i + 1] = -fact * sup2[i];
      }
      sup[i] = temp;
      const double bt = b[i];
      b[i] = b[i + 1];
      b[i + 1] = bt - fact * b[i + 1];
    }
  }
  if (diag[n - 1] == 0.0) diag[n - 1] = tiny;
  b[n - 1] /= diag[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - sup[n - 2] * b[n - 1]) / diag[n - 2];
  for (std::size_t i = n - 2; i-- > 0;) {
    b[i] = (b[i] - sup[i] * b[i + 1] - sup2[i] * b[i + 2]) / diag[i];
  }
}

// Full coefficient vectors hold the n+1 vertex values followed by the n bubble
// amplitudes.
std::vector<double> apply(const Pencil& pen, bool stiffness, const std::vector<double>& x) {
  const auto& diag = stiffness ? pen.k_diag : pen.m_diag;
  const auto& off = stiffness ? pen.k_off : pen.m_off;
  const auto& bb = stiffness ? pen.k_bb : pen.m_bb;
  const auto& lb = stiffness ? pen.k_lb : pen.m_lb;
  const auto& rb = stiffness ? pen.k_rb : pen.m_rb;
  const std::size_t nv = pen.vertices(), ne = pen.elements();
  std::vector<double> y(nv + ne, 0.0);
  for (std::size_t i = 0; i < nv; ++i) y[i] = diag[i] * x[i];
  for (std::size_t e = 0; e < ne; ++e) {
    const double xb = x[nv + e];
    y[e] += off[e] * x[e + 1] + lb[e] * xb;
    y[e + 1] += off[e] * x[e] + rb[e] * xb;
    y[nv + e] = bb[e] * xb + lb[e] * x[e] + rb[e] * x[e + 1];
  }
  return y;
}

// Solves (K - sigma M) x = y by eliminating the bubbles.
std::vector<double> shifted_solve(const Pencil& pen, double sigma, std::vector<double> y, double tiny) {
  const Condensed c = condense(pen, sigma, tiny);
  const std::size_t nv = pen.vertices(), ne = pen.elements();
  std::vector<double> rhs(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(nv));
  for (std::size_t e = 0; e < ne; ++e) {
    rhs[e] -= c.left[e] * y[nv + e] / c.bubble[e];
    rhs[e + 1] -= c.right[e] * y[nv + e] / c.bubble[e];
  }
  solve_tridiagonal(c.off, c.diag, c.off, rhs, tiny);
  std::copy(rhs.begin(), rhs.end(), y.begin());
  for (std::size_t e = 0; e < ne; ++e) {
    y[nv + e] = (y[nv + e] - c.left[e] * rhs[e] - c.right[e] * rhs[e + 1]) / c.bubble[e];
  }
  return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void check_args(const ProfileWeight& weight, int k, int n_elems) {
  weight.validate();
  if (k < 1) throw DomainError("sturm: k must be positive");
  if (n_elems < 8 * k) throw DomainError("sturm: need n_elems >= 8k");
}

// Values at the vertices and element midpoints, which pin down the quadratic.
std::vector<double> sample(const Pencil& pen, const std::vector<double>& x) {
  const std::size_t nv = pen.vertices(), ne = pen.elements();
  std::vector<double> out(2 * ne + 1);
  for (std::size_t i = 0; i < nv; ++i) out[2 * i] = x[i];
  for (std::size_t e = 0; e < ne; ++e) out[2 * e + 1] = 0.5 * (x[e] + x[e + 1]) + x[nv + e];
  return out;
}

}  // namespace

EigenResult sl_eigs(const ProfileWeight& weight, int k, int n_elems) {
  check_args(weight, k, n_elems);
  const Pencil pen = assemble(weight, n_elems);
  const std::size_t n = pen.vertices() + pen.elements();

  EigenResult out;
  out.values = bisect(pen, 0, k);
  out.mesh_size = 1.0 / n_elems;
  out.n_dof = n;

  const double scale = std::max(out.values.back(), 1.0);
  double kmax = 0.0;
  for (double v : pen.k_diag) kmax = std::max(kmax, std::abs(v));
  const double tiny = std::numeric_limits<double>::epsilon() * kmax;

  std::vector<std::vector<double>> basis;
  for (int j = 0; j <= k; ++j) {
    const double sigma = out.values[j];
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + j);
    double residual = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    for (int it = 0; it < 8 && residual > 1e-11; ++it) {
      x = shifted_solve(pen, sigma, apply(pen, false, x), tiny);
      for (const auto& v : basis) {
        const double c = dot(apply(pen, false, v), x);
        for (std::size_t i = 0; i < n; ++i) x[i] -= c * v[i];
      }
      const double mnorm = std::sqrt(dot(apply(pen, false, x), x));
      for (auto& v : x) v /= mnorm;
      auto r = apply(pen, true, x);
      const auto mx = apply(pen, false, x);
      for (std::size_t i = 0; i < n; ++i) r[i] -= sigma * mx[i];
      residual = norm2(r) / (scale * norm2(mx));
      trace.push_back(residual);
    }
    if (!(residual <= 1e-8)) {
      std::ostringstream msg;
      msg << "sturm: inverse iteration for mu_" << j << " stalled at residual " << residual;
      throw ConvergenceError(msg.str(), trace);
    }
    double peak = 0.0;
    for (std::size_t i = 0; i < pen.vertices(); ++i) peak = std::max(peak, std::abs(x[i]));
    for (std::size_t i = 0; i < pen.vertices(); ++i) {
      if (std::abs(x[i]) > 1e-8 * peak) {
        if (x[i] < 0.0) {
          for (auto& w : x) w = -w;
        }
        break;
      }
    }
    out.vectors.push_back(sample(pen, x));
    out.residuals.push_back(residual);
    basis.push_back(std::move(x));
  }
  return out;
}

double weighted_inner(const ProfileWeight& weight, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.size() < 3 || u.size() % 2 == 0) {
    throw DomainError("weighted_inner: need equal-length samples at vertices and midpoints");
  }
  const std::size_t ne = (u.size() - 1) / 2;
  const double h = 1.0 / static_cast<double>(ne);
  const auto rule = specfun::gauss_legendre((weight.dim + 4) / 2 + 1);
  double total = 0.0;
  std::size_t next_break = 1;
  std::vector<double> cuts;
  for (std::size_t e = 0; e < ne; ++e) {
    const double a = static_cast<double>(e) * h;
    const double b = e + 1 == ne ? 1.0 : static_cast<double>(e + 1) * h;
    cuts.assign(1, a);
    while (next_break < weight.breakpoints.size() && weight.breakpoints[next_break] <= a) ++next_break;
    for (std::size_t i = next_break; i < weight.breakpoints.size() && weight.breakpoints[i] < b; ++i) {
      cuts.push_back(weight.breakpoints[i]);
    }
    cuts.push_back(b);
    const auto quad = [&](std::span<const double> f, double r) {
      // Lagrange quadratic through r = 0, 1/2, 1.
      return f[2 * e] * (1 - r) * (1 - 2 * r) + f[2 * e + 1] * 4 * r * (1 - r) + f[2 * e + 2] * r * (2 * r - 1);
    };
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double s = cuts[c], t = cuts[c + 1], half = 0.5 * (t - s);
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        const double x = s + half * (rule.nodes[g] + 1.0);
        const double r = (x - a) / h;
        total += rule.weights[g] * half * weight.p(x) * quad(u, r) * quad(v, r);
      }
    }
  }
  return total;
}

double sl_eigenvalue(const ProfileWeight& weight, int k, int n_elems) {
  check_args(weight, k, n_elems);
  return bisect(assemble(weight, n_elems), k, k).front();
}

double kroger_bound(int k, int d) {
  if (k < 1 || k > 20) throw DomainError("kroger_bound: k must lie in [1, 20]");
  if (d < 2 || d > 22) throw DomainError("kroger_bound: d must lie in [2, 22]");
  if (d == 2) {
    const double r = 2.0 * specfun::j01() + (k - 1) * pi;
    return r * r;
  }
  if (d == 3) return std::pow((k + 1) * pi, 2);
  const double nu = 0.5 * (d - 2);
  if (k % 2 == 1) return 4.0 * std::pow(specfun::bessel_zero(nu, (k + 1) / 2), 2);
  return std::pow(specfun::bessel_zero(nu, k / 2) + specfun::bessel_zero(nu, k / 2 + 1), 2);
}

namespace {

template <class F>
std::pair<double, double> grid_golden_max(F&& f, double lo, double hi) {
  constexpr int kGrid = 101;
  std::array<double, kGrid> xs{}, fs{};
  int best = 0;
  for (int i = 0; i < kGrid; ++i) {
    xs[i] = lo + (hi - lo) * i / (kGrid - 1);
    fs[i] = f(xs[i]);
    if (fs[i] > fs[best]) best = i;
  }
  double a = xs[std::max(best - 1, 0)];
  double b = xs[std::min(best + 1, kGrid - 1)];
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-7) {
    if (fc >= fd) {
      b = d, d = c, fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  double x = fc >= fd ? c : d, fx = std::max(fc, fd);
  if (fs[best] > fx) x = xs[best], fx = fs[best];
  return {x, fx};
}

}  // namespace

TrapezoidOptimum optimize_trapezoid(int k, int d, int n_elems) {
  if (k < 2) throw DomainError("optimize_trapezoid: k must be at least 2");
  if (d < 2 || d == 3) throw DomainError("optimize_trapezoid: d must be >= 2 and != 3");
  if (n_elems < 8 * k) throw DomainError("optimize_trapezoid: need n_elems >= 8k");

  const auto symmetric = [&](double s) {
    return sl_eigenvalue(ProfileWeight::trapezoid(d, 0.5 * (1.0 - s), 0.5 * (1.0 + s)), k, n_elems);
  };
  const auto apex = [&](double a) { return sl_eigenvalue(ProfileWeight::tent(d, a), k, n_elems); };

  const auto [s, fs] = grid_golden_max(symmetric, 0.0, 0.999);
  const auto [a, fa] = grid_golden_max(apex, 0.001, 0.5);
  TrapezoidOptimum out;
  if (fs >= fa) {
    out.plateau = s;
    out.left = 0.5 * (1.0 - s);
    out.right = 0.5 * (1.0 + s);
    out.mu_k = fs;
  } else {
    out.plateau = 0.0;
    out.left = out.right = a;
    out.mu_k = fa;
  }
  return out;
}

ProfileWeight maximizer_profile(int k, int d, std::optional<double> plateau) {
  if (k < 1) throw DomainError("maximizer_profile: k must be positive");
  if (d < 2) throw DomainError("maximizer_profile: d must be at least 2");
  if (k == 1) {
    if (plateau) throw DomainError("maximizer_profile: k = 1 takes no plateau");
    return ProfileWeight::tent(d);
  }
  if (d == 3) throw DomainError("maximizer_profile: d = 3, k >= 2 has no unique maximizer");
  if (plateau) {
    if (!(*plateau >= 0.0 && *plateau < 1.0)) throw DomainError("maximizer_profile: plateau must lie in [0, 1)");
    return ProfileWeight::trapezoid(d, 0.5 * (1.0 - *plateau), 0.5 * (1.0 + *plateau));
  }
  const auto opt = optimize_trapezoid(k, d, std::max(1024, 8 * k));
  return ProfileWeight::trapezoid(d, opt.left, opt.right);
}

bool strictness_check(const ProfileWeight& weight, int k, int n_elems) {
  const double fine = sl_eigenvalue(weight, k, n_elems);
  const double coarse = n_elems / 2 >= 8 * k ? sl_eigenvalue(weight, k, n_elems / 2) : fine;
  const double tolerance = 3.0 * std::abs(coarse - fine) + 1e-12 * fine;
  return fine <= kroger_bound(k, weight.dim) + tolerance;
}

ProfileWeight random_concave_weight(std::mt19937_64& rng, int dim, int max_pieces) {
  std::uniform_int_distribution<int> pieces(1, std::max(1, max_pieces));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int m = pieces(rng);
  std::vector<double> xs{0.0, 1.0};
  while (static_cast<int>(xs.size()) < m + 1) {
    const double x = u(rng);
    if (x > 1e-3 && x < 1.0 - 1e-3) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return b - a < 1e-6; }), xs.end());
  xs.back() = 1.0;

  std::vector<double> slopes(xs.size() - 1);
  for (auto& s : slopes) s = 8.0 * (u(rng) - 0.5);
  std::sort(slopes.rbegin(), slopes.rend());
  std::vector<double> q(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i) q[i] = q[i - 1] + slopes[i - 1] * (xs[i] - xs[i - 1]);

  const double floor = std::min(q.front(), q.back());
  const double top = *std::max_element(q.begin(), q.end());
  const double lift = u(rng) < 0.5 ? 0.0 : u(rng) * std::max(top - floor, 1.0);
  for (auto& v : q) v = v - floor + lift;
  const double peak = *std::max_element(q.begin(), q.end());
  if (!(peak > 0.0)) return ProfileWeight::constant(dim);
  for (auto& v : q) v = std::max(v / peak, 0.0);
  return ProfileWeight{std::move(xs), std::move(q), dim};
}

}  // namespace flatspec::sturm
