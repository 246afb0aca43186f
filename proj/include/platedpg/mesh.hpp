#ifndef PLATEDPG_MESH_HPP
#define PLATEDPG_MESH_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "platedpg/common.hpp"

namespace platedpg {

/// Affine map F(xhat) = B xhat + a from the reference triangle
/// conv{(0,0),(1,0),(0,1)} onto a physical triangle. J = det B > 0,
/// h = longest edge length.
struct AffineMap {
  Mat2 B;
  Vec2 a;
  double J = 0.0;
  double h = 0.0;
  Mat2 Binv;

  Vec2 F(const Vec2& xhat) const { return B * xhat + a; }
  Vec2 Finv(const Vec2& x) const { return Binv * (x - a); }
};

/// Geometry of one edge of a triangle, oriented with the (counterclockwise)
/// traversal of the element boundary: t points from the first to the second
/// local vertex, n is the outward normal (t = n rotated by +90 degrees).
struct EdgeFrame {
  Vec2 p0, p1;
  Vec2 t, n;
  double length = 0.0;
  Vec2 at(double s) const { return p0 + s * (p1 - p0); } ///< s in [0,1]
};

/// Standalone triangle geometry; lets trace pairings and Fortin operators
/// run on elements that are not part of a mesh.
struct TriGeom {
  std::array<Vec2, 3> p;

  AffineMap map() const;
  EdgeFrame frame(int k) const; ///< edge k = (p[k], p[(k+1)%3])
  double area() const;
  double diameter() const;
};

struct Triangle {
  std::array<int, 3> v;
  int ref_edge = 0; ///< local edge (v[r], v[(r+1)%3]) bisected by NVB
  int parent = -1;  ///< triangle id in the mesh this one was refined from
};

struct Edge {
  int a = -1, b = -1;              ///< vertex ids, a < b
  std::array<int, 2> tris{-1, -1}; ///< adjacent triangles (second -1 on boundary)
  bool boundary = false;
};

/// Conforming triangulation with newest-vertex-bisection refinement.
/// Construction and refinement are single-threaded; a built Mesh is
/// immutable and safe for concurrent read-only use.
class Mesh {
public:
  /// Builds topology from a seed triangulation. Seed triangles must be
  /// counterclockwise, non-degenerate and edge-conforming; refinement edges
  /// are initialized to the longest edge (ties: smallest opposite-vertex
  /// local index). Throws std::invalid_argument on bad seeds.
  static Mesh from_seed(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> tris);

  /// NVB bisection of the marked triangles plus conforming closure.
  Mesh refine(const std::vector<int>& marked) const;
  /// All triangles split into four equal-area children (all edges bisected).
  Mesh refine_uniform() const;

  int num_vertices() const { return int(vertices_.size()); }
  int num_edges() const { return int(edges_.size()); }
  int num_triangles() const { return int(tris_.size()); }
  int num_interior_vertices() const { return n_interior_vertices_; }

  const Vec2& vertex(int i) const { return vertices_[i]; }
  const Triangle& triangle(int t) const { return tris_[t]; }
  const Edge& edge(int e) const { return edges_[e]; }
  int triangle_edge(int t, int k) const { return tri_edges_[t][k]; }
  bool vertex_on_boundary(int v) const { return vertex_boundary_[v]; }
  /// Triangles incident to vertex v, sorted by id.
  const std::vector<int>& vertex_star(int v) const { return stars_[v]; }

  TriGeom geometry(int t) const;
  AffineMap affine_map(int t) const;
  EdgeFrame edge_frame(int t, int k) const;

  double triangle_area(int t) const { return geometry(t).area(); }
  double max_diameter() const;
  double min_angle() const;
  double total_area() const;

  /// Plain-text dump: header "N E T", vertex lines "x y boundary_flag",
  /// triangle lines "v0 v1 v2 refedge".
  void dump(std::ostream& os) const;

private:
  void build_topology();
  void validate_seed() const;
  Mesh refine_edges(const std::vector<char>& edge_marked) const;

  std::vector<Vec2> vertices_;
  std::vector<Triangle> tris_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<char> vertex_boundary_;
  std::vector<std::vector<int>> stars_;
  int n_interior_vertices_ = 0;
};

} // namespace platedpg

#endif
