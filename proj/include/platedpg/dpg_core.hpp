#ifndef PLATEDPG_DPG_CORE_HPP
#define PLATEDPG_DPG_CORE_HPP

#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Sparse>

#include "platedpg/mesh.hpp"
#include "platedpg/poly.hpp"
#include "platedpg/quadrature.hpp"
#include "platedpg/trace_spaces.hpp"

namespace platedpg {

/// Constant fourth-order material tensor as a 3x3 matrix acting on Voigt
/// vectors (M_xx, M_yy, M_xy); must be self-adjoint w.r.t. the weighted
/// tensor inner product and positive definite. Default: identity.
struct MaterialTensor {
  Mat3 C = Mat3::Identity();

  Mat3 inverse() const { return C.inverse(); }
  bool is_valid(double tol = 1e-12) const;
};

struct SchemeConfig {
  SchemeKind kind = SchemeKind::Theta;
  int plain_tensor_degree = 4; ///< 4 per the analysis; 2 as experimental knob
  MaterialTensor material;
};

/// Problem data driving a solve: load f and (optional) exact solution used
/// for inhomogeneous clamped boundary data and error measurement.
struct ProblemFns {
  std::function<double(const Vec2&)> f;                ///< load; null means f == 0
  std::function<double(const Vec2&)> exact_u;          ///< optional
  std::function<Vec2(const Vec2&)> exact_grad;         ///< optional
  std::function<Vec3(const Vec2&)> exact_hess_voigt;   ///< optional
};

/// Per-element raw DPG matrices in the broken test-space inner product.
struct LocalSystem {
  Eigen::MatrixXd G; ///< test Gram (SPD)
  Eigen::MatrixXd B; ///< test x trial coupling
  Eigen::VectorXd l; ///< load
};

/// Reference-element tables for one scheme; maps them onto physical elements.
/// Thread-safe after construction.
class ElementKernel {
public:
  explicit ElementKernel(const SchemeConfig& scheme);

  int test_dim() const { return n_test_; }
  int trial_cols() const { return n_trial_; }
  const SchemeConfig& scheme() const { return scheme_; }

  Eigen::MatrixXd local_gram(const TriGeom& g) const;
  Eigen::MatrixXd local_b(const TriGeom& g) const;
  Eigen::VectorXd local_load(const TriGeom& g,
                             const std::function<double(const Vec2&)>& f) const;
  LocalSystem local_system(const TriGeom& g,
                           const std::function<double(const Vec2&)>& f) const;

  /// Trial column layout; theta scheme:
  ///   [u, th_x, th_y, M_xx, M_yy, M_xy, uhat(9), qhat(9)]
  /// plain scheme: [u, M_xx, M_yy, M_xy, uhat(9), qhat(9)].
  int n_field_cols() const { return scheme_.kind == SchemeKind::Theta ? 6 : 4; }

  struct Tables;

private:
  SchemeConfig scheme_;
  int n_test_ = 0, n_trial_ = 0;
  std::shared_ptr<const Tables> tab_;
};

/// Maps element-local trial columns to global free dofs / lifted boundary
/// values. Global layout: [fields | uhat free | qhat free].
class DofMap {
public:
  struct Term {
    int dof;
    double w;
  };

  /// boundary_data: per-vertex (value, gx, gy), size 3*num_vertices; only
  /// boundary-vertex entries are read. Null means homogeneous data.
  DofMap(const Mesh& mesh, const SchemeConfig& scheme, const Eigen::VectorXd* boundary_data);

  int n_free() const { return n_free_; }
  int cols_per_element() const { return cols_; }
  const std::vector<Term>& terms(int t, int c) const { return map_[cols_ * t + c]; }
  double fixed_value(int t, int c) const { return fixed_[cols_ * t + c]; }

  /// Gathers local trial values (free dofs plus lifted data) for element t.
  Eigen::VectorXd local_values(int t, const Eigen::VectorXd& x) const;

  int field_offset(int t) const { return fields_per_ * t; }
  int fields_per_element() const { return fields_per_; }
  int uhat_offset() const { return uhat_offset_; }
  int qhat_offset() const { return qhat_offset_; }
  DofCounts counts() const { return counts_; }

private:
  int cols_ = 0, fields_per_ = 0, n_free_ = 0;
  int uhat_offset_ = 0, qhat_offset_ = 0;
  DofCounts counts_;
  std::vector<std::vector<Term>> map_;
  std::vector<double> fixed_;
};

/// Trial-condensed element contribution K = B^T G^{-1} B, r = B^T G^{-1} l,
/// l_energy = l^T G^{-1} l (so eta(T)^2 = l_energy - 2 x.r + x^T K x).
struct ElementContrib {
  Eigen::MatrixXd K;
  Eigen::VectorXd r;
  double l_energy = 0.0;
};

/// Independent per-element computations; identical output for the serial and
/// OpenMP paths (bit-reproducible: the parallel loop only writes its own slot).
std::vector<ElementContrib> element_contributions(const Mesh& mesh, const ElementKernel& kernel,
                                                  const std::function<double(const Vec2&)>& f,
                                                  bool parallel);

struct GlobalSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
};

/// Deterministic scatter of element contributions (fixed element order);
/// lifted boundary columns move to the right-hand side.
GlobalSystem assemble_global(const Mesh& mesh, const DofMap& map,
                             const std::vector<ElementContrib>& contribs);

struct SolveReport {
  Eigen::VectorXd x;
  double rel_residual = 0.0;
};

/// Sparse Cholesky with symmetric diagonal equilibration and iterative
/// refinement. Throws std::runtime_error on factorization failure.
SolveReport solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs);

/// One DPG discretization on a fixed mesh: local systems, global normal
/// equations, solve and residual evaluation.
class DpgSystem {
public:
  DpgSystem(const Mesh& mesh, const SchemeConfig& scheme, const ProblemFns& data,
            bool parallel = true);

  int n_free() const { return map_.n_free(); }
  const DofMap& dof_map() const { return map_; }
  const Mesh& mesh() const { return *mesh_; }
  const SchemeConfig& scheme() const { return kernel_.scheme(); }
  const ElementKernel& kernel() const { return kernel_; }
  const GlobalSystem& system() const { return sys_; }

  SolveReport solve() const;

  /// eta(T)^2 = r_T^T G_T^{-1} r_T with r_T = l_T - B_T x|_T.
  double element_eta2(int t, const Eigen::VectorXd& x) const;
  double total_residual_energy(const Eigen::VectorXd& x) const;

  /// Per-element fields of a solution vector.
  double u(int t, const Eigen::VectorXd& x) const;
  Vec2 theta(int t, const Eigen::VectorXd& x) const;
  Vec3 M_voigt(int t, const Eigen::VectorXd& x) const;

  const std::vector<ElementContrib>& contribs() const { return contribs_; }
  bool parallel() const { return parallel_; }

private:
  const Mesh* mesh_;
  ElementKernel kernel_;
  Eigen::VectorXd boundary_data_;
  DofMap map_;
  std::vector<ElementContrib> contribs_;
  GlobalSystem sys_;
  bool parallel_;
};

/// Samples (value, gradient) of the exact solution at every vertex
/// (used for lifted clamped data); zero functions give zero data.
Eigen::VectorXd sample_boundary_data(const Mesh& mesh, const ProblemFns& data);

struct ConsistencyReport {
  double du = 0.0; ///< ||u_theta - u_plain||_L2
  double dM = 0.0; ///< ||M_theta - M_plain||_L2
};

/// Solves both schemes on the same mesh and reports field differences.
ConsistencyReport scheme_consistency_check(const Mesh& mesh, const MaterialTensor& mat,
                                           const ProblemFns& data);

} // namespace platedpg

#endif
