#include "platedpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace platedpg {

AffineMap TriGeom::map() const {
  AffineMap m;
  m.B.col(0) = p[1] - p[0];
  m.B.col(1) = p[2] - p[0];
  m.a = p[0];
  m.J = m.B.determinant();
  if (!(m.J > 0.0)) throw std::invalid_argument("degenerate or clockwise triangle");
  m.Binv = m.B.inverse();
  m.h = diameter();
  return m;
}

EdgeFrame TriGeom::frame(int k) const {
  EdgeFrame f;
  f.p0 = p[k];
  f.p1 = p[(k + 1) % 3];
  const Vec2 d = f.p1 - f.p0;
  f.length = d.norm();
  f.t = d / f.length;
  f.n = Vec2(f.t.y(), -f.t.x());
  return f;
}

double TriGeom::area() const {
  const Vec2 u = p[1] - p[0], v = p[2] - p[0];
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

double TriGeom::diameter() const {
  double h = 0.0;
  for (int k = 0; k < 3; ++k) h = std::max(h, (p[(k + 1) % 3] - p[k]).norm());
  return h;
}

Mesh Mesh::from_seed(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> tris) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.tris_.reserve(tris.size());
  for (const auto& tv : tris) {
    Triangle t;
    t.v = tv;
    // longest-edge initialization, ties broken by smallest opposite-vertex index
    double best = -1.0;
    for (int k = 0; k < 3; ++k) {
      const double len = (m.vertices_[tv[(k + 1) % 3]] - m.vertices_[tv[k]]).norm();
      const int opp = (k + 2) % 3;
      if (len > best + 1e-14 * (1.0 + best)) {
        best = len;
        t.ref_edge = k;
      } else if (std::abs(len - best) <= 1e-14 * (1.0 + best) && opp < (t.ref_edge + 2) % 3) {
        t.ref_edge = k;
      }
    }
    m.tris_.push_back(t);
  }
  m.validate_seed();
  m.build_topology();
  return m;
}

void Mesh::validate_seed() const {
  for (const auto& t : tris_) {
    const Vec2 u = vertices_[t.v[1]] - vertices_[t.v[0]];
    const Vec2 v = vertices_[t.v[2]] - vertices_[t.v[0]];
    const double cross = u.x() * v.y() - u.y() * v.x();
    const double scale = u.squaredNorm() + v.squaredNorm();
    if (std::abs(cross) <= 1e-14 * scale)
      throw std::invalid_argument("mesh seed: degenerate (zero-area) triangle");
    if (cross < 0.0) throw std::invalid_argument("mesh seed: clockwise triangle");
  }
  // hanging vertex: a vertex strictly inside another triangle's edge
  for (size_t w = 0; w < vertices_.size(); ++w) {
    for (const auto& t : tris_) {
      for (int k = 0; k < 3; ++k) {
        const int a = t.v[k], b = t.v[(k + 1) % 3];
        if (int(w) == a || int(w) == b) continue;
        const Vec2 pa = vertices_[a], pb = vertices_[b], p = vertices_[w];
        const Vec2 d = pb - pa;
        const double len2 = d.squaredNorm();
        const double s = (p - pa).dot(d) / len2;
        if (s <= 1e-12 || s >= 1.0 - 1e-12) continue;
        const Vec2 proj = pa + s * d;
        if ((p - proj).norm() < 1e-12 * std::sqrt(len2))
          throw std::invalid_argument("mesh seed: non-conforming (hanging vertex)");
      }
    }
  }
}

void Mesh::build_topology() {
  edges_.clear();
  tri_edges_.assign(tris_.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, int> edge_of;
  for (int t = 0; t < int(tris_.size()); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Edge e;
        e.a = key.first;
        e.b = key.second;
        e.tris[0] = t;
        it = edge_of.emplace(key, int(edges_.size())).first;
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.tris[1] != -1)
          throw std::invalid_argument("mesh: edge shared by more than two triangles");
        e.tris[1] = t;
      }
      tri_edges_[t][k] = it->second;
    }
  }
  vertex_boundary_.assign(vertices_.size(), 0);
  for (auto& e : edges_) {
    e.boundary = (e.tris[1] == -1);
    if (e.boundary) {
      vertex_boundary_[e.a] = 1;
      vertex_boundary_[e.b] = 1;
    }
  }
  n_interior_vertices_ = 0;
  for (char f : vertex_boundary_)
    if (!f) ++n_interior_vertices_;
  stars_.assign(vertices_.size(), {});
  for (int t = 0; t < int(tris_.size()); ++t)
    for (int k = 0; k < 3; ++k) stars_[tris_[t].v[k]].push_back(t);
  for (auto& s : stars_) std::sort(s.begin(), s.end());
}

Mesh Mesh::refine_edges(const std::vector<char>& edge_marked) const {
  Mesh out;
  out.vertices_ = vertices_;
  std::vector<int> midpoint(edges_.size(), -1);
  for (int e = 0; e < int(edges_.size()); ++e) {
    if (edge_marked[e]) {
      midpoint[e] = int(out.vertices_.size());
      out.vertices_.push_back(0.5 * (vertices_[edges_[e].a] + vertices_[edges_[e].b]));
    }
  }
  // recursive bisection; children carry midpoints of inherited parent edges
  struct Child {
    std::array<int, 3> v;
    int tag;
    std::array<int, 3> mid; // midpoint vertex per local edge, -1 if unsplit
  };
  auto bisect = [&](auto&& self, const Child& c, int origin) -> void {
    const int r = c.tag;
    if (c.mid[r] < 0) {
      Triangle t;
      t.v = c.v;
      t.ref_edge = c.tag;
      t.parent = origin;
      out.tris_.push_back(t);
      return;
    }
    const int A = c.v[r], B = c.v[(r + 1) % 3], C = c.v[(r + 2) % 3];
    const int mAB = c.mid[r];
    Child c1{{A, mAB, C}, 2, {-1, -1, c.mid[(r + 2) % 3]}};
    Child c2{{mAB, B, C}, 1, {-1, c.mid[(r + 1) % 3], -1}};
    self(self, c1, origin);
    self(self, c2, origin);
  };
  for (int t = 0; t < num_triangles(); ++t) {
    Child c{tris_[t].v, tris_[t].ref_edge, {midpoint[tri_edges_[t][0]],
                                            midpoint[tri_edges_[t][1]],
                                            midpoint[tri_edges_[t][2]]}};
    bisect(bisect, c, t);
  }
  out.build_topology();
  return out;
}

Mesh Mesh::refine(const std::vector<int>& marked) const {
  std::vector<char> edge_marked(edges_.size(), 0);
  for (int t : marked) {
    if (t < 0 || t >= num_triangles()) throw std::out_of_range("refine: bad triangle id");
    edge_marked[tri_edges_[t][tris_[t].ref_edge]] = 1;
  }
  // conforming closure: a triangle with any marked edge must have a marked
  // refinement edge
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < num_triangles(); ++t) {
      const int re = tri_edges_[t][tris_[t].ref_edge];
      if (edge_marked[re]) continue;
      for (int k = 0; k < 3; ++k) {
        if (edge_marked[tri_edges_[t][k]]) {
          edge_marked[re] = 1;
          changed = true;
          break;
        }
      }
    }
  }
  return refine_edges(edge_marked);
}

Mesh Mesh::refine_uniform() const {
  return refine_edges(std::vector<char>(edges_.size(), 1));
}

TriGeom Mesh::geometry(int t) const {
  return TriGeom{{vertices_[tris_[t].v[0]], vertices_[tris_[t].v[1]], vertices_[tris_[t].v[2]]}};
}

AffineMap Mesh::affine_map(int t) const { return geometry(t).map(); }

EdgeFrame Mesh::edge_frame(int t, int k) const { return geometry(t).frame(k); }

double Mesh::max_diameter() const {
  double h = 0.0;
  for (int t = 0; t < num_triangles(); ++t) h = std::max(h, geometry(t).diameter());
  return h;
}

double Mesh::min_angle() const {
  double amin = M_PI;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto g = geometry(t);
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = (g.p[(k + 1) % 3] - g.p[k]).normalized();
      const Vec2 v = (g.p[(k + 2) % 3] - g.p[k]).normalized();
      amin = std::min(amin, std::acos(std::clamp(u.dot(v), -1.0, 1.0)));
    }
  }
  return amin;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

void Mesh::dump(std::ostream& os) const {
  os << num_vertices() << ' ' << num_edges() << ' ' << num_triangles() << '\n';
  char buf[128];
  for (int i = 0; i < num_vertices(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %d\n", vertices_[i].x(), vertices_[i].y(),
                  int(vertex_boundary_[i]));
    os << buf;
  }
  for (const auto& t : tris_)
    os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.ref_edge << '\n';
}

} // namespace platedpg
