#ifndef PLATEDPG_TRACE_SPACES_HPP
#define PLATEDPG_TRACE_SPACES_HPP

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "platedpg/mesh.hpp"
#include "platedpg/poly.hpp"
#include "platedpg/quadrature.hpp"

namespace platedpg {

/// Element-local deflection-trace data: per local vertex a value and a
/// gradient, ordered [v0, g0x, g0y, v1, g1x, g1y, v2, g2x, g2y]. On each edge
/// the value trace is the cubic Hermite interpolant of endpoint values and
/// tangential derivatives, the normal-derivative trace the linear interpolant
/// of endpoint normal derivatives.
using UhatElemDofs = std::array<double, 9>;

/// The 12-dimensional boundary trace space with quadratic normal derivative:
/// the 9 deflection-trace dofs plus one midpoint normal-derivative bubble per
/// edge (entries 9..11). Dropping the bubbles recovers UhatElemDofs.
using TraceP32Dofs = std::array<double, 12>;

/// Evaluates the deflection trace on edge k of a triangle at parameter
/// s in [0,1]. va/vb are endpoint values, ga/gb endpoint gradients, mu the
/// optional quadratic normal-derivative bubble (0 for the trace space).
struct EdgeTrace {
  EdgeFrame f;
  double va, vb;
  Vec2 ga, gb;
  double mu = 0.0;

  double value(double s) const;
  double dvds(double s) const;
  double nder(double s) const;
  Vec2 gradient(double s) const { return f.t * dvds(s) + f.n * nder(s); }
};

EdgeTrace edge_trace(const TriGeom& g, const UhatElemDofs& dofs, int k);
EdgeTrace edge_trace(const TriGeom& g, const TraceP32Dofs& dofs, int k);

/// <trt u, (Xi,tau)>_dT = sum_E int (n.tau) v - (Xi n).grad v ds.
/// Xi evaluates to Voigt (xx,yy,xy), tau to a 2-vector, at physical points.
template <class Dofs, class TensorF, class VectorF>
double pair_uhat_divdiv_vector(const TriGeom& g, const Dofs& dofs, TensorF&& Xi, VectorF&& tau,
                               const EdgeRule& er) {
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const EdgeTrace tr = edge_trace(g, dofs, k);
    for (int q = 0; q < er.size(); ++q) {
      const double s = er.s[q];
      const Vec2 x = tr.f.at(s);
      const Vec3 Xv = Xi(x);
      const Vec2 tv = tau(x);
      const Vec2 Xin(Xv[0] * tr.f.n.x() + Xv[2] * tr.f.n.y(),
                     Xv[2] * tr.f.n.x() + Xv[1] * tr.f.n.y());
      total += er.w[q] * tr.f.length *
               (tr.f.n.dot(tv) * tr.value(s) - Xin.dot(tr.gradient(s)));
    }
  }
  return total;
}

/// <tr u, Theta>_dT = sum_E int (n.Div Theta) v - (Theta n).grad v ds.
template <class Dofs, class TensorF, class DivF>
double pair_uhat_divdiv(const TriGeom& g, const Dofs& dofs, TensorF&& Theta, DivF&& DivTheta,
                        const EdgeRule& er) {
  return pair_uhat_divdiv_vector(g, dofs, std::forward<TensorF>(Theta),
                                 std::forward<DivF>(DivTheta), er);
}

double pair_uhat_divdiv_vector(const TriGeom& g, const UhatElemDofs& dofs, const SymPoly& Xi,
                               const VecPoly& tau, const EdgeRule& er);
double pair_uhat_divdiv(const TriGeom& g, const UhatElemDofs& dofs, const SymPoly& Theta,
                        const EdgeRule& er);

/// Dual functionals q_j of the moment-trace space on an element:
/// j=0..2 vertex values, j=3..5 edge means, j=6..8 edge integrals of the
/// outward normal derivative (edge k joins local vertices k and k+1).
template <class ScalarF, class GradF>
double qhat_functional(const TriGeom& g, int j, ScalarF&& z, GradF&& gz, const EdgeRule& er) {
  if (j < 3) return z(g.p[j]);
  const int k = (j < 6) ? j - 3 : j - 6;
  const EdgeFrame f = g.frame(k);
  double acc = 0.0;
  for (int q = 0; q < er.size(); ++q) {
    const Vec2 x = f.at(er.s[q]);
    acc += er.w[q] * ((j < 6) ? z(x) : f.length * f.n.dot(gz(x)));
  }
  return acc;
}

/// <qhat, z>_dT = sum_j c_j q_j(z) for the 9 per-element dual coefficients
/// c = (c_vert[3], c_avg[3], c_nder[3]).
template <class ScalarF, class GradF>
double pair_qhat(const TriGeom& g, const std::array<double, 9>& c, ScalarF&& z, GradF&& gz,
                 const EdgeRule& er) {
  double total = 0.0;
  for (int j = 0; j < 9; ++j)
    if (c[j] != 0.0) total += c[j] * qhat_functional(g, j, z, gz, er);
  return total;
}

double pair_qhat(const TriGeom& g, const std::array<double, 9>& c, const Poly& z,
                 const EdgeRule& er);

/// Conformity constraints gluing per-element moment-trace coefficients into
/// the global trace space: rows over the 9#T coefficient vector
/// (element-major, order c_vert[3], c_avg[3], c_nder[3]):
///   interior vertex e:  sum over incident elements of c_vert = 0
///   interior edge E:    c_avg(T+) + c_avg(T-) = 0
///   interior edge E:    c_nder(T+) - c_nder(T-) = 0
Eigen::SparseMatrix<double> assemble_qhat_constraints(const Mesh& mesh);

/// Explicit basis of the constraint nullspace: per element, each of the 9
/// local coefficients as a signed combination of free dofs. Free dof count
/// equals 2#E + 3#T - #N0.
class QhatLayout {
public:
  struct Term {
    int dof;
    double w;
  };
  explicit QhatLayout(const Mesh& mesh);
  int n_free() const { return n_free_; }
  /// Terms expressing local coefficient j (0..8) of element t in free dofs.
  const std::vector<Term>& terms(int t, int j) const { return map_[9 * t + j]; }

private:
  int n_free_ = 0;
  std::vector<std::vector<Term>> map_;
};

struct DofCounts {
  int uhat = 0;
  int qhat = 0;
  int fields = 0;
  int total() const { return uhat + qhat + fields; }
};
DofCounts count_dofs(const Mesh& mesh, SchemeKind scheme);

} // namespace platedpg

#endif
