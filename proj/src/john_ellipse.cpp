// Maximal-area inscribed ellipse of a convex polygon.
//
// The ellipse is {B u + c : |u| <= 1} with B symmetric positive definite.
// Containment in the half-plane a.x <= b reads |B a| + a.c <= b, so the
// problem is
//
//   maximize log det B   subject to   |B a_i| + a_i.c <= b_i   (one per edge),
//
// solved with a log-barrier path-following Newton method on the 5 unknowns
// (B00, B01, B11, c0, c1). The polygon is first mapped affinely onto a frame
// of unit diameter and unit orthogonal width; the optimal ellipse is affinely
// equivariant, so the answer is mapped back at the end.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "flatspec/errors.hpp"
#include "flatspec/geometry.hpp"

namespace flatspec::geometry {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

struct HalfPlane {
  Eigen::Vector2d a;  // unit outward normal
  double b = 0.0;
};

class Barrier {
 public:
  explicit Barrier(std::vector<HalfPlane> planes) : planes_(std::move(planes)) {}

  std::size_t size() const { return planes_.size(); }

  bool feasible(const Vec5& x) const {
    const double det = x(0) * x(2) - x(1) * x(1);
    if (!(x(0) > 0.0) || !(det > 0.0)) return false;
    for (const auto& h : planes_) {
      if (!(slack(x, h) > 0.0)) return false;
    }
    return true;
  }

  double value(const Vec5& x, double t) const {
    double f = -t * std::log(x(0) * x(2) - x(1) * x(1));
    for (const auto& h : planes_) f -= std::log(slack(x, h));
    return f;
  }

  void derivatives(const Vec5& x, double t, Vec5& g, Mat5& H) const {
    g.setZero();
    H.setZero();
    const double det = x(0) * x(2) - x(1) * x(1);
    // d(log det)/d(B00, B01, B11) with B01 counted once in det = B00 B11 - B01^2.
    Eigen::Vector3d gd(x(2) / det, -2.0 * x(1) / det, x(0) / det);
    Eigen::Matrix3d Hd;
    Hd << 0.0, 0.0, 1.0,
          0.0, -2.0, 0.0,
          1.0, 0.0, 0.0;
    Hd = Hd / det - gd * gd.transpose();
    g.head<3>() = -t * gd;
    H.topLeftCorner<3, 3>() = -t * Hd;

    for (const auto& h : planes_) {
      const double a1 = h.a(0);
      const double a2 = h.a(1);
      Eigen::Matrix<double, 2, 3> dv;  // d(B a)/d(B00, B01, B11)
      dv << a1, a2, 0.0,
            0.0, a1, a2;
      const Eigen::Vector2d v(x(0) * a1 + x(1) * a2, x(1) * a1 + x(2) * a2);
      const double n = v.norm();
      const Eigen::Vector3d gn = dv.transpose() * v / n;
      const Eigen::Matrix3d Hn =
          dv.transpose() * (Eigen::Matrix2d::Identity() / n - v * v.transpose() / (n * n * n)) * dv;
      const double s = h.b - h.a.dot(x.tail<2>()) - n;
      Vec5 gs;
      gs << -gn, -h.a;
      g -= gs / s;
      H += gs * gs.transpose() / (s * s);
      H.topLeftCorner<3, 3>() += Hn / s;
    }
  }

 private:
  static double slack(const Vec5& x, const HalfPlane& h) {
    const Eigen::Vector2d v(x(0) * h.a(0) + x(1) * h.a(1), x(1) * h.a(0) + x(2) * h.a(1));
    return h.b - h.a.dot(x.tail<2>()) - v.norm();
  }

  std::vector<HalfPlane> planes_;
};

constexpr double kGapTolerance = 1e-10;

}  // namespace

Ellipse john_ellipse(const ConvexPolygon& poly) {
  // Affine normalization: diameter onto the x-axis, unit length and unit width.
  const auto d = diameter(poly);
  const double width = width_orthogonal(poly, d.direction);
  const double theta = std::atan2(d.direction.y, d.direction.x);
  Eigen::Matrix2d R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Eigen::Matrix2d S = Eigen::Vector2d(1.0 / d.length, 1.0 / width).asDiagonal();
  const Eigen::Matrix2d T = S * R.transpose();
  const Eigen::Vector2d origin(d.endpoints[0].x, d.endpoints[0].y);

  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : poly.vertices()) pts.push_back(T * (Eigen::Vector2d(p.x, p.y) - origin));
  const std::size_t n = pts.size();
  std::vector<HalfPlane> planes;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e = pts[(i + 1) % n] - pts[i];
    const Eigen::Vector2d a = Eigen::Vector2d(e(1), -e(0)).normalized();
    planes.push_back({a, a.dot(pts[i])});
    mean += pts[i];
  }
  mean /= static_cast<double>(n);

  double r = std::numeric_limits<double>::infinity();
  for (const auto& h : planes) r = std::min(r, h.b - h.a.dot(mean));
  Vec5 x;
  x << 0.5 * r, 0.0, 0.5 * r, mean(0), mean(1);

  const Barrier barrier(std::move(planes));
  const double m = static_cast<double>(barrier.size());
  double t = 1.0;
  double gap = m / t;
  Vec5 g;
  Mat5 H;
  while (true) {
    double previous = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 0;; ++it) {
      if (it > 200) {
        std::ostringstream msg;
        msg << "john_ellipse: Newton centering did not converge (duality gap " << gap << ")";
        throw ConvergenceError(msg.str(), {gap});
      }
      barrier.derivatives(x, t, g, H);
      const Vec5 step = H.ldlt().solve(-g);
      const double decrement = -g.dot(step);
      if (!(decrement >= 0.0) || !std::isfinite(decrement)) {
        std::ostringstream msg;
        msg << "john_ellipse: barrier Hessian lost definiteness (duality gap " << gap << ")";
        throw ConvergenceError(msg.str(), {gap});
      }
      if (0.5 * decrement <= 1e-10) break;
      // At large t the decrement bottoms out at a roundoff floor far below the gap.
      if (decrement < 0.5 * previous) {
        previous = decrement;
        stalled = 0;
      } else if (++stalled >= 4 && 0.5 * previous <= 1e-6) {
        break;
      }
      double s = 1.0;
      while (!barrier.feasible(x + s * step) && s > 1e-12) s *= 0.5;
      const double f0 = barrier.value(x, t);
      // Barrier values carry roundoff of order t * eps; accept steps within it.
      const double slop = 1e-13 * (std::abs(f0) + 1.0);
      while (s > 1e-12 && barrier.value(x + s * step, t) > f0 - 0.25 * s * decrement + slop) s *= 0.5;
      if (s <= 1e-12) break;  // no further progress at this precision
      x += s * step;
    }
    gap = m / t;
    if (gap < kGapTolerance) break;
    t *= 20.0;
  }

  // Back to the original frame: ellipse = {T^{-1} B u + T^{-1} c + origin}.
  Eigen::Matrix2d B;
  B << x(0), x(1), x(1), x(2);
  const Eigen::Matrix2d Tinv = T.inverse();
  const Eigen::Matrix2d A = Tinv * B;
  const Eigen::Matrix2d P = A * A.transpose();
  const Eigen::Vector2d center = Tinv * x.tail<2>() + origin;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(P);
  const Eigen::Vector2d major = eig.eigenvectors().col(1);

  Ellipse out;
  out.center = {center(0), center(1)};
  out.a1 = std::sqrt(eig.eigenvalues()(1));
  out.a2 = std::sqrt(std::max(eig.eigenvalues()(0), 0.0));
  out.angle = std::atan2(major(1), major(0));
  return out;
}

}  // namespace flatspec::geometry
