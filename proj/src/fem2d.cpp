#include "flatspec/fem2d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "flatspec/errors.hpp"

namespace flatspec::fem {

Matrices assemble(const TriMesh& mesh, Anisotropy anisotropy) {
  if (!(anisotropy.sx > 0.0) || !(anisotropy.sy > 0.0)) throw DomainError("assemble: anisotropy must be positive");
  const auto n = static_cast<Eigen::Index>(mesh.nodes.size());
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * mesh.triangles.size());
  mt.reserve(9 * mesh.triangles.size());
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    const Point p0 = mesh.nodes[t[0]], p1 = mesh.nodes[t[1]], p2 = mesh.nodes[t[2]];
    // Gradients of the barycentric coordinates are (b_i, c_i) / (2A).
    const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    const double area = 0.5 * (b[0] * c[1] - b[1] * c[0]);
    const double h = std::max({geometry::norm(p1 - p0), geometry::norm(p2 - p1), geometry::norm(p0 - p2)});
    if (!(area >= 1e-14 * h * h)) {
      std::ostringstream msg;
      msg << "assemble: degenerate triangle " << e << " (area " << area << ")";
      throw GeometryError(msg.str());
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double k = (anisotropy.sx * b[i] * b[j] + anisotropy.sy * c[i] * c[j]) / (4.0 * area);
        const double m = area / 12.0 * (i == j ? 2.0 : 1.0);
        kt.emplace_back(t[i], t[j], k);
        mt.emplace_back(t[i], t[j], m);
      }
    }
  }
  Matrices out;
  out.K.resize(n, n);
  out.M.resize(n, n);
  out.K.setFromTriplets(kt.begin(), kt.end());
  out.M.setFromTriplets(mt.begin(), mt.end());
  return out;
}

EigenResult neumann_eigs(const TriMesh& mesh, int k, Anisotropy anisotropy, const EigenOptions& options) {
  if (k < 1) throw DomainError("neumann_eigs: k must be positive");
  const auto mats = assemble(mesh, anisotropy);
  auto out = smallest_eigenpairs(mats.K, mats.M, k + 1, options);
  out.mesh_size = mesh.max_edge_length();
  return out;
}

EigenResult neumann_eigs(const ConvexPolygon& poly, int k, double h_target) {
  return neumann_eigs(mesh_polygon(poly, h_target), k);
}

double aspect_ratio(const ConvexPolygon& poly) {
  const auto d = geometry::diameter(poly);
  return geometry::width_orthogonal(poly, d.direction) / d.length;
}

EigenResult neumann_eigs_thin(const ConvexPolygon& poly, int k, double h_target, const ThinOptions& options) {
  if (k < 1) throw DomainError("neumann_eigs_thin: k must be positive");
  const auto frame = geometry::diameter_frame(poly, false);
  double ymin = 0.0, ymax = 0.0;
  for (const auto& p : frame.polygon.vertices()) ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  const double width = ymax - ymin;
  const double length = frame.original.length;
  if (width / length > options.max_aspect * (1 + 1e-9)) {
    std::ostringstream msg;
    msg << "neumann_eigs_thin: aspect " << width / length << " above " << options.max_aspect
        << "; use the isotropic path";
    throw DomainError(msg.str());
  }
  if (!(h_target > 0.0) || h_target > length / 4.0) throw DomainError("neumann_eigs_thin: need 0 < h <= diameter / 4");
  std::vector<Point> scaled;
  for (const auto& p : frame.polygon.vertices()) scaled.push_back({p.x, (p.y - ymin) / width});
  const auto mesh = mesh_columns(ConvexPolygon(std::move(scaled)), h_target, options.layers);
  auto out = neumann_eigs(mesh, k, {1.0, 1.0 / (width * width)});
  out.mesh_size = h_target;
  return out;
}

}  // namespace flatspec::fem
