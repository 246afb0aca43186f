#include "platedpg/trace_spaces.hpp"

namespace platedpg {

namespace {
// cubic Hermite shape functions on [0,1] and their derivatives
inline std::array<double, 4> hermite(double s) {
  const double s2 = s * s, s3 = s2 * s;
  return {2 * s3 - 3 * s2 + 1, s3 - 2 * s2 + s, -2 * s3 + 3 * s2, s3 - s2};
}
inline std::array<double, 4> hermite_d(double s) {
  const double s2 = s * s;
  return {6 * s2 - 6 * s, 3 * s2 - 4 * s + 1, -6 * s2 + 6 * s, 3 * s2 - 2 * s};
}
} // namespace

double EdgeTrace::value(double s) const {
  const auto h = hermite(s);
  return h[0] * va + h[1] * f.length * f.t.dot(ga) + h[2] * vb + h[3] * f.length * f.t.dot(gb);
}

double EdgeTrace::dvds(double s) const {
  const auto d = hermite_d(s);
  return (d[0] * va + d[1] * f.length * f.t.dot(ga) + d[2] * vb +
          d[3] * f.length * f.t.dot(gb)) / f.length;
}

double EdgeTrace::nder(double s) const {
  return (1.0 - s) * f.n.dot(ga) + s * f.n.dot(gb) + 4.0 * s * (1.0 - s) * mu;
}

namespace {
template <class Dofs>
EdgeTrace make_trace(const TriGeom& g, const Dofs& dofs, int k, double mu) {
  const int ia = k, ib = (k + 1) % 3;
  EdgeTrace tr;
  tr.f = g.frame(k);
  tr.va = dofs[3 * ia];
  tr.vb = dofs[3 * ib];
  tr.ga = Vec2(dofs[3 * ia + 1], dofs[3 * ia + 2]);
  tr.gb = Vec2(dofs[3 * ib + 1], dofs[3 * ib + 2]);
  tr.mu = mu;
  return tr;
}
} // namespace

EdgeTrace edge_trace(const TriGeom& g, const UhatElemDofs& dofs, int k) {
  return make_trace(g, dofs, k, 0.0);
}

EdgeTrace edge_trace(const TriGeom& g, const TraceP32Dofs& dofs, int k) {
  return make_trace(g, dofs, k, dofs[9 + k]);
}

double pair_uhat_divdiv_vector(const TriGeom& g, const UhatElemDofs& dofs, const SymPoly& Xi,
                               const VecPoly& tau, const EdgeRule& er) {
  return pair_uhat_divdiv_vector(
      g, dofs, [&](const Vec2& x) { return Xi(x); }, [&](const Vec2& x) { return tau(x); }, er);
}

double pair_uhat_divdiv(const TriGeom& g, const UhatElemDofs& dofs, const SymPoly& Theta,
                        const EdgeRule& er) {
  const VecPoly D = Theta.Div();
  return pair_uhat_divdiv_vector(
      g, dofs, [&](const Vec2& x) { return Theta(x); }, [&](const Vec2& x) { return D(x); }, er);
}

double pair_qhat(const TriGeom& g, const std::array<double, 9>& c, const Poly& z,
                 const EdgeRule& er) {
  const VecPoly gz = grad(z);
  return pair_qhat(
      g, c, [&](const Vec2& x) { return z(x); }, [&](const Vec2& x) { return gz(x); }, er);
}

Eigen::SparseMatrix<double> assemble_qhat_constraints(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  int row = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.vertex_on_boundary(v)) continue;
    for (int t : mesh.vertex_star(v)) {
      int local = -1;
      for (int m = 0; m < 3; ++m)
        if (mesh.triangle(t).v[m] == v) local = m;
      trip.emplace_back(row, 9 * t + local, 1.0);
    }
    ++row;
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    if (ed.boundary) continue;
    int local[2] = {-1, -1};
    for (int s = 0; s < 2; ++s)
      for (int k = 0; k < 3; ++k)
        if (mesh.triangle_edge(ed.tris[s], k) == e) local[s] = k;
    trip.emplace_back(row, 9 * ed.tris[0] + 3 + local[0], 1.0);
    trip.emplace_back(row, 9 * ed.tris[1] + 3 + local[1], 1.0);
    ++row;
    trip.emplace_back(row, 9 * ed.tris[0] + 6 + local[0], 1.0);
    trip.emplace_back(row, 9 * ed.tris[1] + 6 + local[1], -1.0);
    ++row;
  }
  Eigen::SparseMatrix<double> C(row, 9 * mesh.num_triangles());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

QhatLayout::QhatLayout(const Mesh& mesh) {
  map_.assign(9 * mesh.num_triangles(), {});
  int next = 0;
  // edge means: one dof per edge, opposite signs across interior edges
  std::vector<int> avg_dof(mesh.num_edges()), nder_dof(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) avg_dof[e] = next++;
  for (int e = 0; e < mesh.num_edges(); ++e) nder_dof[e] = next++;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edge(t, k);
      const Edge& ed = mesh.edge(e);
      const double sign = (ed.boundary || ed.tris[0] == t) ? 1.0 : -1.0;
      map_[9 * t + 3 + k] = {{avg_dof[e], sign}};
      map_[9 * t + 6 + k] = {{nder_dof[e], 1.0}};
    }
  }
  // vertex coefficients: interior vertex with star T1<...<Tk gets k-1 dofs;
  // the last star element carries minus the sum. Boundary vertices are
  // unconstrained.
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& star = mesh.vertex_star(v);
    auto local_of = [&](int t) {
      for (int m = 0; m < 3; ++m)
        if (mesh.triangle(t).v[m] == v) return m;
      return -1;
    };
    if (mesh.vertex_on_boundary(v)) {
      for (int t : star) map_[9 * t + local_of(t)] = {{next++, 1.0}};
    } else {
      const int k = int(star.size());
      std::vector<int> dofs(k - 1);
      for (int i = 0; i < k - 1; ++i) {
        dofs[i] = next++;
        map_[9 * star[i] + local_of(star[i])] = {{dofs[i], 1.0}};
      }
      auto& last = map_[9 * star[k - 1] + local_of(star[k - 1])];
      for (int i = 0; i < k - 1; ++i) last.push_back({dofs[i], -1.0});
    }
  }
  n_free_ = next;
}

DofCounts count_dofs(const Mesh& mesh, SchemeKind scheme) {
  DofCounts c;
  c.uhat = 3 * mesh.num_interior_vertices();
  c.qhat = 2 * mesh.num_edges() + 3 * mesh.num_triangles() - mesh.num_interior_vertices();
  c.fields = (scheme == SchemeKind::Theta ? 6 : 4) * mesh.num_triangles();
  return c;
}

} // namespace platedpg
