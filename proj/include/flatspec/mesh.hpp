#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "flatspec/geometry.hpp"

namespace flatspec::fem {

using geometry::ConvexPolygon;
using geometry::Point;

/// Conforming triangulation. Triangles are counter-clockwise; a node is a
/// boundary node when it lies on an edge that belongs to a single triangle.
struct TriMesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::uint8_t> boundary_flags;

  double area() const;
  double max_edge_length() const;
  /// Smallest interior angle over all triangles, in degrees.
  double min_angle_degrees() const;
  /// Throws GeometryError unless every triangle has positive area and every
  /// edge is shared by at most two triangles.
  void validate() const;
};

struct MeshOptions {
  std::size_t max_nodes = 500000;
  int smoothing_passes = 5;
  double min_angle_degrees = 20.0;
};

/// Isotropic Delaunay mesh of a convex polygon: boundary points at spacing
/// <= h, interior points on a triangular lattice, Laplacian smoothing, then
/// Delaunay refinement (circumcenter insertion, boundary splits on
/// encroachment) until every edge is <= h and every angle >= the requested
/// minimum. Triangles wedged into polygon corners sharper than 60 degrees are
/// exempt from the angle test, since no triangle there can satisfy it.
///
/// Requires h <= diameter / 4. Throws ResourceError when the node cap is hit.
TriMesh mesh_polygon(const ConvexPolygon& poly, double h_target, const MeshOptions& options = {});

/// Red refinement: every triangle split into four through edge midpoints. The
/// coarse mesh's finite element space is contained in the refined one.
TriMesh refine_uniform(const TriMesh& mesh);

/// Structured mesh for a thin domain given in a frame where the diameter runs
/// along the x-axis: vertical columns at every polygon vertex and at spacing
/// <= hx, each column's section split into max(1, round(layers * length /
/// height)) pieces, neighbouring columns zipped together. Every triangle has
/// two vertices on one column and one on the next, so functions of x alone
/// are represented without spurious y-gradients.
TriMesh mesh_columns(const ConvexPolygon& poly, double hx, int layers);

}  // namespace flatspec::fem
