#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flatspec/errors.hpp"
#include "flatspec/explicit_bound.hpp"
#include "flatspec/fem2d.hpp"
#include "flatspec/geometry.hpp"
#include "flatspec/harness.hpp"
#include "flatspec/profile_weight.hpp"
#include "flatspec/specfun.hpp"
#include "flatspec/sturm.hpp"

namespace py = pybind11;
using namespace flatspec;

namespace {

using XY = std::pair<double, double>;

geometry::ConvexPolygon to_polygon(const std::vector<XY>& xy) {
  std::vector<geometry::Point> pts;
  pts.reserve(xy.size());
  for (const auto& [x, y] : xy) pts.push_back({x, y});
  return geometry::ConvexPolygon(std::move(pts));
}

std::vector<XY> to_xy(const geometry::ConvexPolygon& poly) {
  std::vector<XY> out;
  for (const auto& p : poly.vertices()) out.emplace_back(p.x, p.y);
  return out;
}

py::dict eigen_dict(const EigenResult& r) {
  py::dict d;
  d["values"] = py::array_t<double>(r.values.size(), r.values.data());
  d["residuals"] = py::array_t<double>(r.residuals.size(), r.residuals.data());
  if (!r.vectors.empty()) {
    py::array_t<double> v({r.vectors.size(), r.vectors.front().size()});
    auto m = v.mutable_unchecked<2>();
    for (std::size_t i = 0; i < r.vectors.size(); ++i)
      for (std::size_t j = 0; j < r.vectors[i].size(); ++j) m(i, j) = r.vectors[i][j];
    d["vectors"] = v;
  }
  d["mesh_size"] = r.mesh_size;
  d["n_dof"] = r.n_dof;
  return d;
}

ProfileWeight make_weight(const std::vector<double>& breakpoints, const std::vector<double>& q, int dim) {
  ProfileWeight w{breakpoints, q, dim};
  w.validate();
  return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neumann eigenvalue bounds for flat convex domains";

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_ArithmeticError);

  // Special functions and quadrature.
  m.def("bessel_j", &specfun::bessel_j, py::arg("nu"), py::arg("x"));
  m.def("bessel_j_prime", &specfun::bessel_j_prime, py::arg("nu"), py::arg("x"));
  m.def("bessel_zero", &specfun::bessel_zero, py::arg("nu"), py::arg("m"));
  m.def("j01", &specfun::j01);
  m.def(
      "gauss_legendre",
      [](int n) {
        const auto r = specfun::gauss_legendre(n);
        return std::make_tuple(r.nodes, r.weights);
      },
      py::arg("n"), "Nodes and weights on [-1, 1].");

  // Geometry. Polygons are sequences of (x, y) in counter-clockwise order.
  m.def(
      "diameter",
      [](const std::vector<XY>& xy) {
        const auto d = geometry::diameter(to_polygon(xy));
        return std::make_tuple(d.length, XY{d.endpoints[0].x, d.endpoints[0].y}, XY{d.endpoints[1].x, d.endpoints[1].y});
      },
      py::arg("polygon"), "Length and endpoints of the diameter.");
  m.def(
      "flatness",
      [](const std::vector<XY>& xy) {
        const auto f = geometry::flatness(to_polygon(xy));
        py::dict d;
        d["D"] = f.D;
        d["w"] = f.w;
        d["a2"] = f.a2;
        return d;
      },
      py::arg("polygon"), "Diameter D, orthogonal width w and smaller John semiaxis a2.");
  m.def(
      "john_ellipse",
      [](const std::vector<XY>& xy) {
        const auto e = geometry::john_ellipse(to_polygon(xy));
        py::dict d;
        d["center"] = XY{e.center.x, e.center.y};
        d["a1"] = e.a1;
        d["a2"] = e.a2;
        d["angle"] = e.angle;
        return d;
      },
      py::arg("polygon"));
  m.def("symmetric_about_mediatrix", [](const std::vector<XY>& xy) { return geometry::symmetric_about_mediatrix(to_polygon(xy)); },
        py::arg("polygon"));
  m.def("unit_base_triangle", [](double alpha) { return to_xy(geometry::unit_base_triangle(alpha)); }, py::arg("alpha"),
        "Isosceles triangle with apex angle alpha (radians) and unit base.");
  m.def("regular_polygon", [](int n, double r) { return to_xy(geometry::regular_polygon(n, r)); }, py::arg("n"),
        py::arg("circumradius") = 1.0);
  m.def("rectangle", [](double w, double h) { return to_xy(geometry::rectangle(w, h)); }, py::arg("width"), py::arg("height"));
  m.def("symmetric_trapezoid", [](double top, double h) { return to_xy(geometry::symmetric_trapezoid(top, h)); },
        py::arg("top"), py::arg("height"));

  // One-dimensional Sturm-Liouville problem.
  m.def("kroger_bound", &sturm::kroger_bound, py::arg("k"), py::arg("d"));
  m.def(
      "sl_eigs",
      [](const std::vector<double>& breakpoints, const std::vector<double>& q, int dim, int k, int n_elems) {
        return eigen_dict(sturm::sl_eigs(make_weight(breakpoints, q, dim), k, n_elems));
      },
      py::arg("breakpoints"), py::arg("q"), py::arg("dim"), py::arg("k"), py::arg("n_elems") = 2048,
      "Eigenpairs 0..k of -(p u')' = mu p u on (0, 1), p = q^(dim - 1).");
  m.def(
      "sl_tent",
      [](int dim, int k, int n_elems) { return eigen_dict(sturm::sl_eigs(ProfileWeight::tent(dim), k, n_elems)); },
      py::arg("dim"), py::arg("k"), py::arg("n_elems") = 2048);

  // Two-dimensional Neumann problem.
  m.def(
      "neumann_eigs",
      [](const std::vector<XY>& xy, int k, double h) { return eigen_dict(fem::neumann_eigs(to_polygon(xy), k, h)); },
      py::arg("polygon"), py::arg("k"), py::arg("h"), "P1 Neumann eigenpairs 0..k with mesh size h.");
  m.def(
      "neumann_eigs_thin",
      [](const std::vector<XY>& xy, int k, double h) { return eigen_dict(fem::neumann_eigs_thin(to_polygon(xy), k, h)); },
      py::arg("polygon"), py::arg("k"), py::arg("h"));

  // Explicit constant for symmetric domains.
  m.def("tau", &explicit_bound::tau);
  m.def("g_root", &explicit_bound::g_root);
  m.def("Q", &explicit_bound::Q, py::arg("w"));
  m.def("explicit_constant_json", [] { return nlohmann::json(explicit_bound::explicit_constant()).dump(); });
  m.def(
      "J_functional",
      [](const std::vector<double>& t, const std::vector<double>& v, double w) {
        return explicit_bound::J_functional(explicit_bound::ConcaveH{t, v}, w);
      },
      py::arg("breakpoints"), py::arg("values"), py::arg("w"));
  m.def(
      "verify_symmetric_bound",
      [](const std::vector<XY>& xy, double h) {
        const auto r = explicit_bound::verify_symmetric_bound(to_polygon(xy), h);
        py::dict d;
        d["D"] = r.D;
        d["w"] = r.w;
        d["lhs"] = r.lhs;
        d["rhs"] = r.rhs;
        d["margin"] = r.margin;
        d["thin_path"] = r.thin_path;
        return d;
      },
      py::arg("polygon"), py::arg("h") = 0.02);

  // Harness: JSON config in, (exit code, stdout, stderr) out.
  m.def(
      "run_json",
      [](const std::string& config) {
        const auto cfg = nlohmann::json::parse(config).get<harness::ExperimentConfig>();
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = harness::run(cfg, out, err);
        }
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("config"));
  m.attr("SCHEMA_VERSION") = harness::kSchemaVersion;
}
