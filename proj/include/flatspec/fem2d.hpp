#pragma once

#include "flatspec/eigen_result.hpp"
#include "flatspec/eigensolver.hpp"
#include "flatspec/geometry.hpp"
#include "flatspec/mesh.hpp"

namespace flatspec::fem {

/// Coefficients of the gradient form sx u_x v_x + sy u_y v_y.
struct Anisotropy {
  double sx = 1.0;
  double sy = 1.0;
};

struct Matrices {
  SparseMatrix K;  // stiffness, constants in the kernel
  SparseMatrix M;  // consistent mass, entries sum to the area
};

/// Linear-element stiffness and mass matrices. Throws GeometryError on a
/// triangle with area below 1e-14 h^2 (h its longest edge).
Matrices assemble(const TriMesh& mesh, Anisotropy anisotropy = {});

/// First k+1 Neumann eigenpairs (mu_0 = 0 included) on a given mesh.
EigenResult neumann_eigs(const TriMesh& mesh, int k, Anisotropy anisotropy = {}, const EigenOptions& options = {});

/// First k+1 Neumann eigenvalues of the polygon on an isotropic mesh of size
/// h_target. Each is an upper bound for the exact eigenvalue.
EigenResult neumann_eigs(const ConvexPolygon& poly, int k, double h_target);

/// width orthogonal to the diameter / diameter.
double aspect_ratio(const ConvexPolygon& poly);

struct ThinOptions {
  double max_aspect = 0.2;  // reject flatter-than-needed domains above this
  int layers = 8;           // column pieces across the full width
};

/// Thin-domain path: the polygon is moved so its diameter lies on the x-axis
/// and y is divided by the width w, giving a unit-height domain on which the
/// form u_x v_x + u_y v_y / w^2 is discretized on a column mesh (columns at
/// spacing h_target). The Rayleigh quotient is unchanged by the map, so the
/// eigenvalues are those of the original polygon. Throws DomainError when the
/// aspect ratio exceeds options.max_aspect.
EigenResult neumann_eigs_thin(const ConvexPolygon& poly, int k, double h_target, const ThinOptions& options = {});

}  // namespace flatspec::fem
