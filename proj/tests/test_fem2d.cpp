#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flatspec/errors.hpp"
#include "flatspec/fem2d.hpp"
#include "flatspec/specfun.hpp"
#include "flatspec/sturm.hpp"

using namespace flatspec;
using namespace flatspec::fem;
using namespace flatspec::geometry;

namespace {

constexpr double pi = std::numbers::pi;
const double jp11 = 1.8411837813406593;  // first zero of J_1'

double kroger1() { return 4 * specfun::j01() * specfun::j01(); }

double distance_to_boundary(const ConvexPolygon& poly, Point p) {
  double best = 1e300;
  const auto& v = poly.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i], b = v[(i + 1) % v.size()];
    const Point e = b - a;
    const double t = std::clamp(dot(p - a, e) / dot(e, e), 0.0, 1.0);
    best = std::min(best, norm(p - (a + t * e)));
  }
  return best;
}

}  // namespace

TEST_CASE("meshes cover the polygon") {
  const auto sq = mesh_polygon(rectangle(1, 1), 0.25);
  CHECK(std::abs(sq.area() - 1.0) <= 1e-12);
  const auto tri = make_triangle(2 * pi / 3, 1.0);
  const auto mt = mesh_polygon(tri, 0.1);
  CHECK(mt.area() == doctest::Approx(0.5 * std::sqrt(3.0) * 0.5).epsilon(1e-10));

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto poly = random_convex_polygon(rng, 12, 0.3 + 0.07 * trial);
    const double h = diameter(poly).length / 12;
    const auto m = mesh_polygon(poly, h);
    REQUIRE_NOTHROW(m.validate());
    CHECK(std::abs(m.area() - poly.area()) <= 1e-10 * poly.area());
    CHECK(m.max_edge_length() <= h * (1 + 1e-12));
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      if (m.boundary_flags[i]) CHECK(distance_to_boundary(poly, m.nodes[i]) <= 1e-12);
    }
  }
}

TEST_CASE("mesh quality") {
  for (const auto& poly : {rectangle(1, 1), rectangle(2, 1), regular_polygon(6, 1.0), regular_polygon(64, 1.0),
                           make_triangle(pi / 3, 1.0)}) {
    const double h = diameter(poly).length / 20;
    const auto m = mesh_polygon(poly, h);
    CHECK(m.min_angle_degrees() >= 20.0);
    CHECK(m.max_edge_length() <= h * (1 + 1e-12));
  }
  // Corners sharper than 60 degrees cannot hold 20-degree triangles in
  // general; everything away from them must.
  const auto thin = make_triangle(0.75 * pi, 1.0);
  const auto m = mesh_polygon(thin, 0.05);
  double worst = 180.0;
  for (const auto& t : m.triangles) {
    bool at_corner = false;
    for (int v : t) {
      for (std::size_t c = 1; c < 3; ++c) at_corner = at_corner || norm(m.nodes[v] - thin[c]) < 1e-12;
    }
    if (at_corner) continue;
    TriMesh single{{m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]]}, {{0, 1, 2}}, {0, 0, 0}};
    worst = std::min(worst, single.min_angle_degrees());
  }
  CHECK(worst >= 20.0 - 1e-9);
}

TEST_CASE("mesh_polygon rejects bad input") {
  CHECK_THROWS_AS(mesh_polygon(rectangle(1, 1), 0.5), DomainError);
  CHECK_THROWS_AS(mesh_polygon(rectangle(1, 1), -0.1), DomainError);
  MeshOptions tiny;
  tiny.max_nodes = 100;
  CHECK_THROWS_AS(mesh_polygon(rectangle(1, 1), 0.01, tiny), ResourceError);
}

TEST_CASE("uniform refinement") {
  const auto coarse = mesh_polygon(regular_polygon(7, 1.0), 0.4);
  const auto fine = refine_uniform(coarse);
  CHECK(fine.triangles.size() == 4 * coarse.triangles.size());
  CHECK(fine.area() == doctest::Approx(coarse.area()).epsilon(1e-13));
  CHECK(fine.max_edge_length() <= 0.5 * coarse.max_edge_length() + 1e-14);
  REQUIRE_NOTHROW(fine.validate());
  for (std::size_t i = 0; i < coarse.nodes.size(); ++i) CHECK(fine.nodes[i] == coarse.nodes[i]);
}

TEST_CASE("assembly") {
  const TriMesh right{{{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {1, 1, 1}};
  const auto e = assemble(right);
  const double expected[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(e.K.coeff(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-15));
  }

  const auto m = mesh_polygon(regular_polygon(9, 1.0), 0.1);
  const auto mats = assemble(m, {1.0, 1.0});
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mats.K.rows());
  const Eigen::VectorXd row = mats.K * ones;
  double kmax = 0.0;
  for (int k = 0; k < mats.K.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(mats.K, k); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
  }
  CHECK(row.cwiseAbs().maxCoeff() <= 1e-12 * kmax);
  CHECK(ones.dot(mats.M * ones) == doctest::Approx(regular_polygon(9, 1.0).area()).epsilon(1e-10));
  CHECK((SparseMatrix(mats.K.transpose()) - mats.K).norm() == 0.0);
  CHECK((SparseMatrix(mats.M.transpose()) - mats.M).norm() == 0.0);

  const auto aniso = assemble(m, {1.0, 4.0});
  const auto plain = assemble(m);
  CHECK((plain.K - mats.K).norm() == 0.0);
  CHECK((aniso.K - mats.K).norm() > 0.0);

  const TriMesh flat{{{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {1, 1, 1}};
  CHECK_THROWS_AS(assemble(flat), GeometryError);
}

TEST_CASE("eigenvalue oracles") {
  const auto sq = neumann_eigs(rectangle(1, 1), 2, 0.02);
  CHECK(std::abs(sq.values[0]) <= 1e-9 * sq.values[1]);
  CHECK(std::abs(sq.values[1] / (pi * pi) - 1) <= 0.01);
  CHECK(std::abs(sq.values[2] / (pi * pi) - 1) <= 0.01);
  CHECK(sq.values[1] >= pi * pi);  // upper bound
  for (double r : sq.residuals) CHECK(r <= 1e-9);

  const auto disk = neumann_eigs(regular_polygon(256, 1.0), 1, 0.02);
  CHECK(std::abs(disk.values[1] / (jp11 * jp11) - 1) <= 0.01);
  const nlohmann::json j = disk;
  CHECK(j.at("mu").size() == 2);
  CHECK(j.contains("n_dof"));
}

TEST_CASE("the constant mode and mass-orthonormal vectors") {
  const auto m = mesh_polygon(regular_polygon(5, 1.0), 0.05);
  const auto mats = assemble(m);
  const auto r = neumann_eigs(m, 4);
  const Eigen::Map<const Eigen::VectorXd> u0(r.vectors[0].data(), r.vectors[0].size());
  CHECK((u0.array() - u0(0)).abs().maxCoeff() <= 1e-6 * std::abs(u0(0)));
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; b <= 4; ++b) {
      const Eigen::Map<const Eigen::VectorXd> x(r.vectors[a].data(), r.vectors[a].size());
      const Eigen::Map<const Eigen::VectorXd> y(r.vectors[b].data(), r.vectors[b].size());
      CHECK(std::abs(x.dot(mats.M * y) - (a == b ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("dense and iterative eigensolvers agree") {
  const auto m = mesh_polygon(regular_polygon(7, 1.0), 0.08);
  REQUIRE(m.nodes.size() > 300);
  const auto mats = assemble(m);
  EigenOptions dense;
  dense.dense_threshold = 100000;
  EigenOptions iterative;
  iterative.dense_threshold = 0;
  const auto a = smallest_eigenpairs(mats.K, mats.M, 6, dense);
  const auto b = smallest_eigenpairs(mats.K, mats.M, 6, iterative);
  for (int i = 1; i < 6; ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-10));
  EigenOptions starved = iterative;
  starved.max_iterations = 1;
  CHECK_THROWS_AS(smallest_eigenpairs(mats.K, mats.M, 6, starved), ConvergenceError);
}

TEST_CASE("thin-domain path") {
  const auto rect = neumann_eigs_thin(rectangle(1, 0.01), 1, 0.0025);
  CHECK(std::abs(rect.values[1] / (pi * pi) - 1) <= 0.005);

  const double alpha = 0.98 * pi;
  const auto tri = neumann_eigs_thin(unit_base_triangle(alpha), 1, 0.0025);
  const double ratio = tri.values[1] / kroger1();
  CHECK(ratio >= std::pow(std::sin(alpha / 2), 2));
  CHECK(ratio < 1.0);

  // Aspect 0.255 is above the default threshold; both paths must agree.
  const auto t07 = unit_base_triangle(0.7 * pi);
  CHECK_THROWS_AS(neumann_eigs_thin(t07, 1, 0.005), DomainError);
  ThinOptions loose;
  loose.max_aspect = 0.3;
  const double thin = neumann_eigs_thin(t07, 1, 0.005, loose).values[1];
  const double iso = neumann_eigs(t07, 1, 0.01).values[1];
  CHECK(std::abs(thin - iso) <= 0.005 * iso);
}

TEST_CASE("thin triangles stay below their collapsed one-dimensional problem") {
  for (double alpha : {0.85 * pi, 0.9 * pi, 0.95 * pi}) {
    const auto t = unit_base_triangle(alpha);
    const double two_d = neumann_eigs_thin(t, 1, 0.0025).values[1];
    const double one_d = sturm::sl_eigenvalue(profile(t), 1, 1024);
    CHECK(two_d <= one_d * (1 + 1e-4));
  }
}

TEST_CASE("scaling law") {
  const auto poly = regular_polygon(6, 1.0);
  const double base = neumann_eigs(poly, 2, 0.1).values[1];
  for (double t : {0.5, 3.0}) {
    const double scaled = neumann_eigs(poly.transformed(0.0, t, {}), 2, 0.1 * t).values[1];
    CHECK(scaled * t * t == doctest::Approx(base).epsilon(1e-6));
  }
}

TEST_CASE("random polygons: Szego-Weinberger and strict Kroger") {
  std::mt19937_64 rng(8);
  const double disk = jp11 * jp11 * pi;
  for (int trial = 0; trial < 50; ++trial) {
    const auto raw = random_convex_polygon(rng, 8 + trial % 20, 0.2 + 0.8 * (trial % 5) / 4.0);
    const auto poly = raw.transformed(0.0, 1.0 / diameter(raw).length, {});
    const double mu1 = neumann_eigs(poly, 1, 0.04).values[1];
    CHECK(mu1 * poly.area() <= disk * 1.01);
    CHECK(mu1 < kroger1());
  }
}

TEST_CASE("nested refinement decreases eigenvalues at second order") {
  auto mesh = mesh_polygon(rectangle(1, 1), 0.2);
  std::vector<std::vector<double>> values;
  for (int level = 0; level < 4; ++level) {
    values.push_back(neumann_eigs(mesh, 3).values);
    mesh = refine_uniform(mesh);
  }
  for (int j = 1; j <= 3; ++j) {
    for (int level = 1; level < 4; ++level) CHECK(values[level][j] <= values[level - 1][j]);
    for (int level = 2; level < 4; ++level) {
      const double prev = values[level - 2][j] - values[level - 1][j];
      const double next = values[level - 1][j] - values[level][j];
      CHECK(prev >= 3.0 * next);
    }
  }
}
