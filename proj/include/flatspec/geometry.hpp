#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "flatspec/profile_weight.hpp"

namespace flatspec::geometry {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline Point perp(Point a) { return {-a.y, a.x}; }

/// Open bounded convex planar domain given by its vertices in counter-clockwise
/// order. Construction validates strict convexity and positive area; the
/// vertex list is immutable afterwards.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Point> vertices);

  /// Convex hull of a point cloud (collinear and duplicate points dropped).
  static ConvexPolygon hull(std::span<const Point> points);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  const Point& operator[](std::size_t i) const { return vertices_[i]; }

  double area() const;
  Point centroid() const;
  double perimeter() const;

  /// Image under x -> scale * R(angle) x + shift.
  ConvexPolygon transformed(double angle, double scale, Point shift) const;

 private:
  std::vector<Point> vertices_;
};

struct Ellipse {
  Point center;
  double a1 = 0.0;     // major semiaxis
  double a2 = 0.0;     // minor semiaxis, a1 >= a2 > 0
  double angle = 0.0;  // direction of the major axis, radians

  /// Ellipse-norm of p - center; <= 1 inside.
  double gauge(Point p) const;
  /// max over the ellipse of dot(dir, x).
  double support(Point dir) const;
};

struct DiameterInfo {
  double length = 0.0;
  std::array<Point, 2> endpoints;
  std::array<std::size_t, 2> indices{};  // vertex indices, indices[0] < indices[1]
  Point direction;                        // unit vector endpoints[0] -> endpoints[1]
};

struct Flatness {
  double D = 0.0;
  double w = 0.0;
  double a2 = 0.0;
};

struct SectionMoment {
  double c = 0.0;   // mean of x2 over the section
  double m2 = 0.0;  // integral of (x2 - c)^2 over the section
};

/// Rotating-calipers diameter. Among equally long pairs (relative 1e-12) the
/// lexicographically smallest vertex-index pair wins.
DiameterInfo diameter(const ConvexPolygon& poly);

/// Extent of the projection onto the direction perpendicular to `dir`.
double width_orthogonal(const ConvexPolygon& poly, Point dir);

/// Maximal-area inscribed ellipse (log-det barrier, duality gap 1e-10).
Ellipse john_ellipse(const ConvexPolygon& poly);

Flatness flatness(const ConvexPolygon& poly);

/// Chord-length profile along the diameter, after moving the diameter onto
/// [0, 1] x {0}. Returned with dim = 2.
ProfileWeight profile(const ConvexPolygon& poly);

/// Vertical section {x2 : (x1, x2) in poly} in the polygon's own frame.
SectionMoment section_moment(const ConvexPolygon& poly, double x1);

/// [lo, hi] of the vertical line x = x1 intersected with the closed polygon.
std::array<double, 2> vertical_section(const ConvexPolygon& poly, double x1);

/// Isosceles triangle with aperture alpha and equal sides l, base on the x-axis.
ConvexPolygon make_triangle(double alpha, double l);

/// Superequilateral family member with base [-1/2, 1/2] x {0}, so D = 1.
ConvexPolygon unit_base_triangle(double alpha);

ConvexPolygon regular_polygon(int n, double circumradius, Point center = {});
ConvexPolygon rectangle(double width, double height);
/// Isosceles trapezoid on the base [0, 1] x {0} with a centred top side of
/// length `top` at the given height. The base must be the unique diameter
/// (DomainError otherwise), so the polygon is symmetric about its bisector.
ConvexPolygon symmetric_trapezoid(double top, double height);
/// Two circular caps of height `half_height` < 1/2 over the chord [0, 1] x {0},
/// one reflected onto the other; 2 * n_per_arc vertices.
ConvexPolygon symmetric_lens(int n_per_arc, double half_height);

/// Convex hull of `n_points` uniform points in [0, 1] x [0, aspect].
ConvexPolygon random_convex_polygon(std::mt19937_64& rng, int n_points, double aspect);

/// Rigidly moved and scaled copy whose diameter runs from (0, 0) to (length, 0)
/// where length = 1 if `unit` else the original diameter.
struct DiameterFrame {
  ConvexPolygon polygon;
  DiameterInfo original;
  double scale = 1.0;  // new lengths = scale * old lengths
};
DiameterFrame diameter_frame(const ConvexPolygon& poly, bool unit);

/// True when reflection across the perpendicular bisector of the diameter maps
/// the vertex set onto itself within tol * D.
bool symmetric_about_mediatrix(const ConvexPolygon& poly, double tol = 1e-9);

}  // namespace flatspec::geometry
