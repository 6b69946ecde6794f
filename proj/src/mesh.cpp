#include "flatspec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "flatspec/errors.hpp"

namespace flatspec::fem {

namespace {

using geometry::cross;
using geometry::dot;
using geometry::norm;

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

double orient(Point a, Point b, Point c) { return cross(b - a, c - a); }

// > 0 when d lies inside the circle through the counter-clockwise a, b, c.
long double incircle(Point a, Point b, Point c, Point d) {
  const long double adx = a.x - d.x, ady = a.y - d.y;
  const long double bdx = b.x - d.x, bdy = b.y - d.y;
  const long double cdx = c.x - d.x, cdy = c.y - d.y;
  return (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy) +
         (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
}

Point circumcenter(Point a, Point b, Point c) {
  const Point ab = b - a, ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
  return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

double min_angle(Point a, Point b, Point c) {
  const auto angle = [](Point p, Point q, Point r) {
    const Point u = q - p, v = r - p;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

double max_edge(Point a, Point b, Point c) { return std::max({norm(b - a), norm(c - b), norm(a - c)}); }
double min_edge(Point a, Point b, Point c) { return std::min({norm(b - a), norm(c - b), norm(a - c)}); }

// Triangulation of a convex region with neighbour links; n[i] is the triangle
// across the edge opposite v[i], -1 on the boundary.
class Delaunay {
 public:
  struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> n{-1, -1, -1};
    bool alive = true;
  };

  enum class Kind { inserted, duplicate, outside, encroaches };
  struct Outcome {
    Kind kind = Kind::inserted;
    int a = -1, b = -1;  // offending boundary segment
  };

  std::vector<Point> pts;
  std::vector<std::uint8_t> on_boundary;
  std::vector<Tri> tris;

  Delaunay(const std::vector<Point>& polygon, double scale) : eps_(1e-11 * scale) {
    pts = polygon;
    on_boundary.assign(pts.size(), 1);
    const int n = static_cast<int>(pts.size());
    std::unordered_map<std::uint64_t, std::pair<int, int>> edges;
    for (int i = 1; i + 1 < n; ++i) tris.push_back({{0, i, i + 1}, {-1, -1, -1}, true});
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      for (int i = 0; i < 3; ++i) {
        const int a = tris[t].v[(i + 1) % 3], b = tris[t].v[(i + 2) % 3];
        const auto key = edge_key(a, b);
        const auto it = edges.find(key);
        if (it == edges.end()) {
          edges.emplace(key, std::pair{t, i});
        } else {
          tris[t].n[i] = it->second.first;
          tris[it->second.first].n[it->second.second] = t;
        }
      }
    }
    make_delaunay();
  }

  std::size_t live_count() const { return tris.size() - free_.size(); }

  // Lawson flips until every interior edge is locally Delaunay.
  void make_delaunay() {
    for (int pass = 0; pass < 1000; ++pass) {
      bool flipped = false;
      for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        if (!tris[t].alive) continue;
        for (int i = 0; i < 3; ++i) {
          const int u = tris[t].n[i];
          if (u < 0) continue;
          const int j = back_index(u, t);
          const auto& T = tris[t];
          const Point d = pts[tris[u].v[j]];
          if (incircle(pts[T.v[0]], pts[T.v[1]], pts[T.v[2]], d) > 0 && flip(t, i)) {
            flipped = true;
            break;
          }
        }
      }
      if (!flipped) return;
    }
  }

  // Inserts p (Bowyer-Watson). With `guard`, nothing changes when p lies
  // outside or inside the diametral circle of a boundary segment on the
  // cavity; the segment is reported instead.
  Outcome insert(Point p, bool boundary_point, bool guard, int start = -1) {
    int t = locate(p, start);
    if (t < 0) return {Kind::outside, exit_a_, exit_b_};
    for (int v : tris[t].v) {
      if (norm(pts[v] - p) <= 10 * eps_) return {Kind::duplicate};
    }

    // Cavity: triangles whose circumcircle holds p, grown from t.
    std::vector<int> cavity{t};
    std::vector<std::uint8_t> in(tris.size(), 0);
    in[t] = 1;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      for (int nb : tris[cavity[k]].n) {
        if (nb < 0 || in[nb]) continue;
        const auto& T = tris[nb];
        if (incircle(pts[T.v[0]], pts[T.v[1]], pts[T.v[2]], p) > 0) {
          in[nb] = 1;
          cavity.push_back(nb);
        }
      }
    }

    struct Edge {
      int a, b, outer;
    };
    std::vector<Edge> rim;
    int split_a = -1, split_b = -1;
    for (int repair = 0;; ++repair) {
      rim.clear();
      split_a = split_b = -1;
      bool changed = false;
      for (int c : cavity) {
        for (int i = 0; i < 3 && !changed; ++i) {
          const int nb = tris[c].n[i];
          if (nb >= 0 && in[nb]) continue;
          const int a = tris[c].v[(i + 1) % 3], b = tris[c].v[(i + 2) % 3];
          const double dist = orient(pts[a], pts[b], p) / norm(pts[b] - pts[a]);
          if (dist > eps_) {
            rim.push_back({a, b, nb});
            continue;
          }
          if (nb < 0 && std::abs(dist) <= eps_ && dot(pts[a] - p, pts[b] - p) < 0) {
            split_a = a, split_b = b;  // p sits on this boundary segment
            continue;
          }
          if (nb >= 0) {
            in[nb] = 1;
            cavity.push_back(nb);
          } else if (c != t) {
            in[c] = 0;
            cavity.erase(std::find(cavity.begin(), cavity.end(), c));
          } else {
            return {Kind::duplicate};
          }
          changed = true;
        }
        if (changed) break;
      }
      if (!changed) break;
      if (repair > 1000) throw GeometryError("mesh: Bowyer-Watson cavity repair did not terminate");
    }

    if (guard) {
      for (const auto& e : rim) {
        if (e.outer < 0 && dot(pts[e.a] - p, pts[e.b] - p) < 0) return {Kind::encroaches, e.a, e.b};
      }
    }

    const int pv = static_cast<int>(pts.size());
    pts.push_back(p);
    on_boundary.push_back(boundary_point || split_a >= 0 ? 1 : 0);
    for (int c : cavity) {
      tris[c].alive = false;
      free_.push_back(c);
    }
    std::unordered_map<int, int> starts, ends;
    std::vector<int> created;
    for (const auto& e : rim) {
      int id;
      if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
      } else {
        id = static_cast<int>(tris.size());
        tris.emplace_back();
      }
      tris[id] = Tri{{e.a, e.b, pv}, {-1, -1, e.outer}, true};
      if (e.outer >= 0) {
        auto& O = tris[e.outer];
        for (int i = 0; i < 3; ++i) {
          const int oa = O.v[(i + 1) % 3], ob = O.v[(i + 2) % 3];
          if (oa == e.b && ob == e.a) O.n[i] = id;
        }
      }
      starts[e.a] = id;
      ends[e.b] = id;
      created.push_back(id);
    }
    for (int id : created) {
      auto& T = tris[id];
      const auto s = starts.find(T.v[1]);
      T.n[0] = s == starts.end() ? -1 : s->second;
      const auto f = ends.find(T.v[0]);
      T.n[1] = f == ends.end() ? -1 : f->second;
    }
    last_ = created.empty() ? last_ : created.front();
    created_ = std::move(created);
    return {Kind::inserted};
  }

  int last() const { return last_; }
  const std::vector<int>& created() const { return created_; }

  std::vector<std::array<int, 3>> live() const {
    std::vector<std::array<int, 3>> out;
    for (const auto& T : tris) {
      if (T.alive) out.push_back(T.v);
    }
    return out;
  }

 private:
  int back_index(int u, int t) const {
    for (int j = 0; j < 3; ++j) {
      if (tris[u].n[j] == t) return j;
    }
    throw GeometryError("mesh: inconsistent neighbour links");
  }

  bool flip(int t, int i) {
    const int u = tris[t].n[i];
    const int j = back_index(u, t);
    const int a = tris[t].v[i], b = tris[t].v[(i + 1) % 3], c = tris[t].v[(i + 2) % 3];
    const int d = tris[u].v[j];
    if (!(orient(pts[a], pts[b], pts[d]) > 0 && orient(pts[a], pts[d], pts[c]) > 0)) return false;
    const int nt_b = tris[t].n[(i + 1) % 3];  // across (c, a)
    const int nt_c = tris[t].n[(i + 2) % 3];  // across (a, b)
    // u = (d, c, b) starting at index j.
    const int nu_c = tris[u].n[(j + 1) % 3];  // across (b, d)
    const int nu_b = tris[u].n[(j + 2) % 3];  // across (d, c)
    tris[t] = Tri{{a, b, d}, {nu_c, u, nt_c}, true};
    tris[u] = Tri{{a, d, c}, {nu_b, nt_b, t}, true};
    if (nu_c >= 0) tris[nu_c].n[back_index(nu_c, u)] = t;
    if (nt_b >= 0) tris[nt_b].n[back_index(nt_b, t)] = u;
    return true;
  }

  // Visibility walk; returns -1 (and records the exit segment) when p lies
  // outside the triangulated region.
  int locate(Point p, int start) {
    int t = start >= 0 && start < static_cast<int>(tris.size()) && tris[start].alive ? start : last_;
    if (t < 0 || t >= static_cast<int>(tris.size()) || !tris[t].alive) {
      t = 0;
      while (!tris[t].alive) ++t;
    }
    const std::size_t cap = 4 * tris.size() + 64;
    for (std::size_t step = 0; step < cap; ++step) {
      int next = -2;
      const int offset = static_cast<int>(step % 3);
      for (int r = 0; r < 3; ++r) {
        const int i = (r + offset) % 3;
        const int a = tris[t].v[(i + 1) % 3], b = tris[t].v[(i + 2) % 3];
        const double dist = orient(pts[a], pts[b], p) / norm(pts[b] - pts[a]);
        if (dist < -eps_) {
          if (tris[t].n[i] < 0) {
            exit_a_ = a, exit_b_ = b;
            next = -1;
          } else {
            next = tris[t].n[i];
          }
          break;
        }
      }
      if (next == -2) return t;
      if (next == -1) return -1;
      t = next;
    }
    throw GeometryError("mesh: point location did not terminate");
  }

  double eps_;
  int last_ = 0;
  int exit_a_ = -1, exit_b_ = -1;
  std::vector<int> free_;
  std::vector<int> created_;
};

void smooth(Delaunay& dt, int passes, double h) {
  for (int pass = 0; pass < passes; ++pass) {
    const auto tris = dt.live();
    std::vector<std::vector<int>> incident(dt.pts.size());
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      for (int v : tris[t]) incident[v].push_back(t);
    }
    for (std::size_t v = 0; v < dt.pts.size(); ++v) {
      if (dt.on_boundary[v] || incident[v].empty()) continue;
      Point sum{};
      int count = 0;
      for (int t : incident[v]) {
        for (int w : tris[t]) {
          if (w != static_cast<int>(v)) {
            sum = sum + dt.pts[w];
            ++count;
          }
        }
      }
      const Point old = dt.pts[v];
      dt.pts[v] = (1.0 / count) * sum;
      for (int t : incident[v]) {
        const auto& T = tris[t];
        if (!(orient(dt.pts[T[0]], dt.pts[T[1]], dt.pts[T[2]]) > 1e-3 * h * h)) {
          dt.pts[v] = old;
          break;
        }
      }
    }
    dt.make_delaunay();
  }
}

}  // namespace

double TriMesh::area() const {
  double total = 0.0;
  for (const auto& t : triangles) total += 0.5 * orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
  return total;
}

double TriMesh::max_edge_length() const {
  double out = 0.0;
  for (const auto& t : triangles) out = std::max(out, max_edge(nodes[t[0]], nodes[t[1]], nodes[t[2]]));
  return out;
}

double TriMesh::min_angle_degrees() const {
  double out = 180.0;
  for (const auto& t : triangles) {
    out = std::min(out, min_angle(nodes[t[0]], nodes[t[1]], nodes[t[2]]) * 180.0 / std::numbers::pi);
  }
  return out;
}

void TriMesh::validate() const {
  std::unordered_map<std::uint64_t, int> count;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& t = triangles[i];
    for (int v : t) {
      if (v < 0 || static_cast<std::size_t>(v) >= nodes.size()) throw GeometryError("mesh: node index out of range");
    }
    if (!(orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]) > 0.0)) {
      std::ostringstream msg;
      msg << "mesh: triangle " << i << " is not positively oriented";
      throw GeometryError(msg.str());
    }
    for (int k = 0; k < 3; ++k) {
      if (++count[edge_key(t[k], t[(k + 1) % 3])] > 2) throw GeometryError("mesh: edge shared by three triangles");
    }
  }
  if (boundary_flags.size() != nodes.size()) throw GeometryError("mesh: boundary flags size mismatch");
}

namespace {

std::vector<std::uint8_t> boundary_from_edges(std::size_t n_nodes, const std::vector<std::array<int, 3>>& tris) {
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) ++count[edge_key(t[k], t[(k + 1) % 3])];
  }
  std::vector<std::uint8_t> flags(n_nodes, 0);
  for (const auto& [key, c] : count) {
    if (c == 1) {
      flags[key >> 32] = 1;
      flags[key & 0xffffffffu] = 1;
    }
  }
  return flags;
}

}  // namespace

TriMesh mesh_polygon(const ConvexPolygon& poly, double h, const MeshOptions& options) {
  const double diam = geometry::diameter(poly).length;
  if (!(h > 0.0) || h > diam / 4.0 * (1 + 1e-12)) throw DomainError("mesh_polygon: need 0 < h <= diameter / 4");
  const auto& v = poly.vertices();
  const std::size_t nv = v.size();
  // A circumcenter dropped into the lattice sits 1.155 spacings from its
  // neighbours; keep that below h so refinement does not cascade.
  const double spacing = 0.85 * h;

  std::vector<double> corner(nv);  // interior angle at each vertex
  for (std::size_t i = 0; i < nv; ++i) {
    const Point a = v[(i + nv - 1) % nv] - v[i], b = v[(i + 1) % nv] - v[i];
    corner[i] = std::atan2(std::abs(cross(a, b)), dot(a, b));
  }
  std::vector<std::uint8_t> sharp(nv);
  for (std::size_t i = 0; i < nv; ++i) sharp[i] = corner[i] < std::numbers::pi / 3.0 - 1e-9;

  // Lattice density alone: the count can only grow from here.
  const double estimate = 2.0 / std::sqrt(3.0) * poly.area() / (spacing * spacing) + poly.perimeter() / h;
  if (estimate > static_cast<double>(options.max_nodes)) {
    std::ostringstream msg;
    msg << "mesh_polygon: node cap " << options.max_nodes << " exceeded (about " << estimate << " nodes)";
    throw ResourceError(msg.str());
  }

  Delaunay dt(v, diam);
  const auto budget = [&] {
    if (dt.pts.size() > options.max_nodes) {
      std::ostringstream msg;
      msg << "mesh_polygon: node cap " << options.max_nodes << " exceeded";
      throw ResourceError(msg.str());
    }
  };

  for (std::size_t i = 0; i < nv; ++i) {
    const Point a = v[i], b = v[(i + 1) % nv];
    const int segments = static_cast<int>(std::ceil(norm(b - a) / spacing - 1e-9));
    for (int s = 1; s < segments; ++s) {
      const double t = static_cast<double>(s) / segments;
      dt.insert(a + t * (b - a), true, false, dt.last());
      budget();
    }
  }

  // Triangular lattice, rows bottom to top so consecutive points are close.
  double xmin = v[0].x, xmax = v[0].x, ymin = v[0].y, ymax = v[0].y;
  for (const auto& p : v) {
    xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  }
  const double dy = spacing * std::sqrt(3.0) / 2.0;
  const auto clearance = [&](Point p) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nv; ++i) {
      const Point e = v[(i + 1) % nv] - v[i];
      d = std::min(d, cross(e, p - v[i]) / norm(e));
    }
    return d;
  };
  int row = 0;
  for (double y = ymin + 0.5 * dy; y < ymax; y += dy, ++row) {
    const double shift = (row % 2) * 0.5 * spacing;
    const bool reverse = row % 2 == 1;
    std::vector<Point> line;
    for (double x = xmin + shift; x < xmax; x += spacing) {
      const Point p{x, y};
      if (clearance(p) >= 0.6 * spacing) line.push_back(p);
    }
    if (reverse) std::reverse(line.begin(), line.end());
    for (const auto& p : line) {
      dt.insert(p, false, false, dt.last());
      budget();
    }
  }

  smooth(dt, options.smoothing_passes, h);

  // Delaunay refinement for size and shape.
  const double min_angle_rad = options.min_angle_degrees * std::numbers::pi / 180.0;
  const auto touches_sharp = [&](const std::array<int, 3>& t) {
    for (int k : t) {
      if (k < static_cast<int>(nv) && sharp[k]) return true;
    }
    return false;
  };
  const auto is_bad = [&](int t) {
    const auto& T = dt.tris[t];
    if (!T.alive) return false;
    const Point a = dt.pts[T.v[0]], b = dt.pts[T.v[1]], c = dt.pts[T.v[2]];
    if (max_edge(a, b, c) > h) return true;
    return min_angle(a, b, c) < min_angle_rad && !touches_sharp(T.v) && min_edge(a, b, c) > 0.05 * h;
  };
  std::vector<std::pair<int, std::array<int, 3>>> work;
  for (int t = static_cast<int>(dt.tris.size()) - 1; t >= 0; --t) {
    if (is_bad(t)) work.push_back({t, dt.tris[t].v});
  }
  while (!work.empty()) {
    const auto [t, verts] = work.back();
    work.pop_back();
    if (!dt.tris[t].alive || dt.tris[t].v != verts || !is_bad(t)) continue;
    const Point cc = circumcenter(dt.pts[verts[0]], dt.pts[verts[1]], dt.pts[verts[2]]);
    auto out = dt.insert(cc, false, true, t);
    if (out.kind == Delaunay::Kind::outside || out.kind == Delaunay::Kind::encroaches) {
      out = dt.insert(0.5 * (dt.pts[out.a] + dt.pts[out.b]), true, false, t);
      // The original triangle may survive a boundary split; revisit it.
      work.push_back({t, verts});
    }
    if (out.kind != Delaunay::Kind::inserted) continue;
    budget();
    for (int id : dt.created()) {
      if (is_bad(id)) work.push_back({id, dt.tris[id].v});
    }
  }

  TriMesh mesh;
  mesh.nodes = dt.pts;
  mesh.triangles = dt.live();
  mesh.boundary_flags = boundary_from_edges(mesh.nodes.size(), mesh.triangles);
  mesh.validate();
  return mesh;
}

TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh out;
  out.nodes = mesh.nodes;
  std::unordered_map<std::uint64_t, int> mid;
  const auto midpoint = [&](int a, int b) {
    const auto key = edge_key(a, b);
    const auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    mid.emplace(key, id);
    return id;
  };
  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  out.boundary_flags = boundary_from_edges(out.nodes.size(), out.triangles);
  return out;
}

TriMesh mesh_columns(const ConvexPolygon& poly, double hx, int layers) {
  if (!(hx > 0.0) || layers < 1) throw DomainError("mesh_columns: need hx > 0 and layers >= 1");
  const auto& v = poly.vertices();
  double xmin = v[0].x, xmax = v[0].x, ymin = v[0].y, ymax = v[0].y;
  for (const auto& p : v) {
    xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  }
  const double height = ymax - ymin;
  const double length = xmax - xmin;

  std::vector<double> xs;
  const int columns = static_cast<int>(std::ceil(length / hx - 1e-9));
  for (int i = 0; i <= columns; ++i) xs.push_back(xmin + length * i / columns);
  for (const auto& p : v) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  std::vector<double> cols{xs.front()};
  for (double x : xs) {
    if (x - cols.back() > 1e-9 * length) cols.push_back(x);
  }
  cols.back() = xmax;

  TriMesh mesh;
  std::vector<std::vector<int>> ids(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto [lo, hi] = geometry::vertical_section(poly, cols[c]);
    const double len = hi - lo;
    const int pieces = len <= 1e-12 * height ? 0 : std::max(1, static_cast<int>(std::lround(layers * len / height)));
    if (pieces == 0) {
      ids[c].push_back(static_cast<int>(mesh.nodes.size()));
      mesh.nodes.push_back({cols[c], 0.5 * (lo + hi)});
      continue;
    }
    for (int j = 0; j <= pieces; ++j) {
      ids[c].push_back(static_cast<int>(mesh.nodes.size()));
      mesh.nodes.push_back({cols[c], lo + len * j / pieces});
    }
  }
  for (std::size_t c = 0; c + 1 < cols.size(); ++c) {
    const auto& a = ids[c];
    const auto& b = ids[c + 1];
    const double na = static_cast<double>(a.size() - 1), nb = static_cast<double>(b.size() - 1);
    std::size_t i = 0, j = 0;
    while (i + 1 < a.size() || j + 1 < b.size()) {
      // Advance on the column whose next node sits lower in relative height.
      const double ta = i + 1 < a.size() ? (i + 1) / na : 2.0;
      const double tb = j + 1 < b.size() ? (j + 1) / nb : 2.0;
      if (tb <= ta) {
        mesh.triangles.push_back({a[i], b[j], b[j + 1]});
        ++j;
      } else {
        mesh.triangles.push_back({a[i], b[j], a[i + 1]});
        ++i;
      }
    }
  }
  mesh.boundary_flags = boundary_from_edges(mesh.nodes.size(), mesh.triangles);
  mesh.validate();
  return mesh;
}

}  // namespace flatspec::fem
