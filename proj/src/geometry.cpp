#include "flatspec/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

#include "flatspec/errors.hpp"
#include "flatspec/specfun.hpp"

namespace flatspec::geometry {

namespace {

// Normalized turn between consecutive edges must exceed this for strict convexity.
constexpr double kTurnTolerance = 1e-12;

bool strict_left_turn(Point a, Point b, Point c) {
  const Point e0 = b - a;
  const Point e1 = c - b;
  const double scale = norm(e0) * norm(e1);
  return scale > 0.0 && cross(e0, e1) > kTurnTolerance * scale;
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (const auto& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw GeometryError("non-finite vertex");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!strict_left_turn(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n])) {
      std::ostringstream msg;
      msg << "polygon is not strictly convex and counter-clockwise at vertex " << (i + 1) % n;
      throw GeometryError(msg.str());
    }
  }
  if (!(area() > 0.0)) throw GeometryError("polygon has non-positive area");
}

ConvexPolygon ConvexPolygon::hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw GeometryError("hull: fewer than 3 distinct points");
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && !strict_left_turn(h[k - 2], h[k - 1], p)) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Point p = pts[i];
    while (k >= lower && !strict_left_turn(h[k - 2], h[k - 1], p)) --k;
    h[k++] = p;
  }
  h.resize(k - 1);
  return ConvexPolygon(std::move(h));
}

double ConvexPolygon::area() const {
  double twice = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) twice += cross(vertices_[i], vertices_[(i + 1) % n]);
  return 0.5 * twice;
}

Point ConvexPolygon::centroid() const {
  const std::size_t n = vertices_.size();
  const Point o = vertices_[0];
  double a = 0.0;
  Point c;
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = vertices_[i] - o;
    const Point q = vertices_[(i + 1) % n] - o;
    const double w = cross(p, q);
    a += w;
    c = c + w * (p + q);
  }
  return o + (1.0 / (3.0 * a)) * c;
}

double ConvexPolygon::perimeter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += norm(vertices_[(i + 1) % size()] - vertices_[i]);
  return s;
}

ConvexPolygon ConvexPolygon::transformed(double angle, double scale, Point shift) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<Point> out;
  out.reserve(vertices_.size());
  for (const auto& p : vertices_) {
    out.push_back({scale * (c * p.x - s * p.y) + shift.x, scale * (s * p.x + c * p.y) + shift.y});
  }
  return ConvexPolygon(std::move(out));
}

double Ellipse::gauge(Point p) const {
  const Point d = p - center;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double u = (c * d.x + s * d.y) / a1;
  const double v = (-s * d.x + c * d.y) / a2;
  return std::hypot(u, v);
}

double Ellipse::support(Point dir) const {
  const Point e1{std::cos(angle), std::sin(angle)};
  return dot(center, dir) + std::hypot(a1 * dot(dir, e1), a2 * dot(dir, perp(e1)));
}

DiameterInfo diameter(const ConvexPolygon& poly) {
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  // Twice the area of triangle (edge i, vertex j): distance of j from edge i.
  const auto height = [&](std::size_t i, std::size_t j) {
    const Point a = v[i];
    const Point b = v[(i + 1) % n];
    return cross(b - a, v[j % n] - a);
  };

  std::size_t j = 0;
  for (std::size_t t = 1; t < n; ++t) {
    if (height(0, t) > height(0, j)) j = t;
  }
  std::vector<std::array<std::size_t, 2>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i1 = (i + 1) % n;
    for (std::size_t guard = 0; guard < n && height(i, j + 1) > height(i, j); ++guard) j = (j + 1) % n;
    pairs.push_back({i, j});
    pairs.push_back({i1, j});
    // Parallel opposite edge: both of its endpoints are antipodal to edge i.
    if (height(i, j + 1) >= height(i, j) * (1.0 - 1e-12)) {
      pairs.push_back({i, (j + 1) % n});
      pairs.push_back({i1, (j + 1) % n});
    }
  }

  double best = 0.0;
  for (const auto& [a, b] : pairs) best = std::max(best, norm(v[a] - v[b]));
  std::array<std::size_t, 2> chosen{n, n};
  for (auto [a, b] : pairs) {
    if (a == b || norm(v[a] - v[b]) < best * (1.0 - 1e-12)) continue;
    if (a > b) std::swap(a, b);
    if (a < chosen[0] || (a == chosen[0] && b < chosen[1])) chosen = {a, b};
  }

  if (poly.area() < 1e-14 * best * best) {
    throw GeometryError("diameter: polygon is degenerate (area below 1e-14 * D^2)");
  }
  DiameterInfo info;
  info.indices = chosen;
  info.endpoints = {v[chosen[0]], v[chosen[1]]};
  info.length = norm(info.endpoints[1] - info.endpoints[0]);
  info.direction = (1.0 / info.length) * (info.endpoints[1] - info.endpoints[0]);
  return info;
}

double width_orthogonal(const ConvexPolygon& poly, Point dir) {
  const double len = norm(dir);
  if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("width_orthogonal: direction must be nonzero");
  const Point n = (1.0 / len) * perp(dir);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : poly.vertices()) {
    const double t = dot(p, n);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return hi - lo;
}

Flatness flatness(const ConvexPolygon& poly) {
  const auto d = diameter(poly);
  return {d.length, width_orthogonal(poly, d.direction), john_ellipse(poly).a2};
}

DiameterFrame diameter_frame(const ConvexPolygon& poly, bool unit) {
  const auto d = diameter(poly);
  const double scale = unit ? 1.0 / d.length : 1.0;
  const double theta = -std::atan2(d.direction.y, d.direction.x);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::vector<Point> out;
  out.reserve(poly.size());
  for (const auto& p : poly.vertices()) {
    const Point q = p - d.endpoints[0];
    out.push_back({scale * (c * q.x - s * q.y), scale * (s * q.x + c * q.y)});
  }
  out[d.indices[0]] = {0.0, 0.0};
  out[d.indices[1]] = {scale * d.length, 0.0};
  return {ConvexPolygon(std::move(out)), d, scale};
}

std::array<double, 2> vertical_section(const ConvexPolygon& poly, double x1) {
  const auto& v = poly.vertices();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % v.size()];
    if ((a.x - x1) * (b.x - x1) > 0.0) continue;
    if (a.x == b.x) {
      lo = std::min({lo, a.y, b.y});
      hi = std::max({hi, a.y, b.y});
      continue;
    }
    const double y = a.y + (x1 - a.x) / (b.x - a.x) * (b.y - a.y);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (!(lo <= hi)) {
    std::ostringstream msg;
    msg << "vertical_section: x1=" << x1 << " misses the polygon";
    throw GeometryError(msg.str());
  }
  return {lo, hi};
}

ProfileWeight profile(const ConvexPolygon& poly) {
  const auto frame = diameter_frame(poly, true);
  std::vector<double> xs;
  for (const auto& p : frame.polygon.vertices()) xs.push_back(std::clamp(p.x, 0.0, 1.0));
  xs.push_back(0.0);
  xs.push_back(1.0);
  std::sort(xs.begin(), xs.end());
  std::vector<double> unique{0.0};
  for (double x : xs) {
    if (x - unique.back() > 1e-12) unique.push_back(x);
  }
  if (1.0 - unique.back() <= 1e-12) unique.back() = 1.0;
  else unique.push_back(1.0);

  ProfileWeight w;
  w.dim = 2;
  w.breakpoints = unique;
  w.q_values.resize(unique.size(), 0.0);
  for (std::size_t i = 1; i + 1 < unique.size(); ++i) {
    const auto [lo, hi] = vertical_section(frame.polygon, unique[i]);
    w.q_values[i] = hi - lo;
  }
  return w;
}

SectionMoment section_moment(const ConvexPolygon& poly, double x1) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  for (const auto& p : poly.vertices()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  if (!(x1 > xmin && x1 < xmax)) {
    std::ostringstream msg;
    msg << "section_moment: x1=" << x1 << " outside the open projection (" << xmin << ", " << xmax << ")";
    throw GeometryError(msg.str());
  }
  const auto [lo, hi] = vertical_section(poly, x1);
  static const auto rule = specfun::gauss_legendre(3);
  const double length = hi - lo;
  const double c = specfun::integrate([](double y) { return y; }, lo, hi, rule, 1) / length;
  const double m2 = specfun::integrate([c](double y) { return (y - c) * (y - c); }, lo, hi, rule, 1);
  return {c, m2};
}

ConvexPolygon make_triangle(double alpha, double l) {
  if (!(alpha > 0.0 && alpha < std::numbers::pi) || !(l > 0.0) || !std::isfinite(l)) {
    std::ostringstream msg;
    msg << "make_triangle: require alpha in (0, pi) and l > 0 (alpha=" << alpha << ", l=" << l << ")";
    throw DomainError(msg.str());
  }
  const double s = std::sin(0.5 * alpha);
  const double c = std::cos(0.5 * alpha);
  return ConvexPolygon({{-l * s, 0.0}, {l * s, 0.0}, {0.0, l * c}});
}

ConvexPolygon unit_base_triangle(double alpha) {
  return make_triangle(alpha, 0.5 / std::sin(0.5 * alpha));
}

ConvexPolygon regular_polygon(int n, double circumradius, Point center) {
  if (n < 3 || !(circumradius > 0.0)) throw DomainError("regular_polygon: need n >= 3 and radius > 0");
  std::vector<Point> v;
  v.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    v.push_back({center.x + circumradius * std::cos(t), center.y + circumradius * std::sin(t)});
  }
  return ConvexPolygon(std::move(v));
}

ConvexPolygon rectangle(double width, double height) {
  return ConvexPolygon({{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}});
}

ConvexPolygon symmetric_trapezoid(double top, double height) {
  if (!(top >= 0.0 && top < 1.0 && height > 0.0)) throw DomainError("symmetric_trapezoid: need 0 <= top < 1, height > 0");
  const double half = 0.5 * (1.0 + top);
  if (half * half + height * height >= 1.0) throw DomainError("symmetric_trapezoid: the base is not the diameter");
  const double l = 0.5 * (1.0 - top);
  if (top == 0.0) return ConvexPolygon({{0.0, 0.0}, {1.0, 0.0}, {0.5, height}});
  return ConvexPolygon({{0.0, 0.0}, {1.0, 0.0}, {1.0 - l, height}, {l, height}});
}

ConvexPolygon symmetric_lens(int n_per_arc, double half_height) {
  if (n_per_arc < 2 || !(half_height > 0.0 && half_height < 0.5)) {
    throw DomainError("symmetric_lens: need n_per_arc >= 2 and 0 < half_height < 1/2");
  }
  const double r = (0.25 + half_height * half_height) / (2.0 * half_height);
  const double cy = half_height - r;  // centre of the upper arc
  const double t0 = std::atan2(-cy, 0.5);
  std::vector<Point> v;
  for (int i = 0; i <= n_per_arc; ++i) {
    const double t = t0 + (std::numbers::pi - 2.0 * t0) * i / n_per_arc;
    v.push_back({0.5 + r * std::cos(t), cy + r * std::sin(t)});
  }
  v.front() = {1.0, 0.0};
  v.back() = {0.0, 0.0};
  for (int i = n_per_arc - 1; i >= 1; --i) v.push_back({v[i].x, -v[i].y});
  return ConvexPolygon(std::move(v));
}

ConvexPolygon random_convex_polygon(std::mt19937_64& rng, int n_points, double aspect) {
  if (n_points < 3 || !(aspect > 0.0)) throw DomainError("random_convex_polygon: need n >= 3 and aspect > 0");
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::uniform_real_distribution<double> uy(0.0, aspect);
  for (int attempt = 0;; ++attempt) {
    std::vector<Point> pts(n_points);
    for (auto& p : pts) p = {ux(rng), uy(rng)};
    try {
      return ConvexPolygon::hull(pts);
    } catch (const GeometryError&) {
      if (attempt > 20) throw;
    }
  }
}

bool symmetric_about_mediatrix(const ConvexPolygon& poly, double tol) {
  const auto d = diameter(poly);
  const Point mid = 0.5 * (d.endpoints[0] + d.endpoints[1]);
  const Point u = d.direction;
  for (const auto& p : poly.vertices()) {
    const Point r = p - (2.0 * dot(p - mid, u)) * u;
    bool matched = false;
    for (const auto& q : poly.vertices()) {
      if (norm(q - r) <= tol * d.length) {
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace flatspec::geometry
