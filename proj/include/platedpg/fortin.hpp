#ifndef PLATEDPG_FORTIN_HPP
#define PLATEDPG_FORTIN_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "platedpg/mesh.hpp"
#include "platedpg/poly.hpp"
#include "platedpg/quadrature.hpp"
#include "platedpg/trace_spaces.hpp"
#include "platedpg/transforms.hpp"

namespace platedpg {

/// Dual basis of the nine moment-trace functionals q_j in P^3 on the
/// reference element: chi_k built from nodal functions eta_1..3, edge
/// products eta_4..6 and the bubble-corrected eta_7..9. A(j,k) = <q_k,eta_j>
/// has the block form [[A1,A2],[0,A3]] with A1 upper triangular.
struct DualBasisGG {
  std::array<Poly, 9> eta;
  std::array<Poly, 9> chi;
  Eigen::Matrix<double, 9, 9> A;
  double det_A = 0.0;
  double det_A3 = 0.0;
};

DualBasisGG build_dual_basis_gg();

/// Reference-element Fortin operators mapped onto physical elements through
/// the pullback / Piola / Piola-Kirchhoff transforms. The two saddle-point
/// operators project (in the respective test inner product) onto the affine
/// set fixed by the boundary and volume matching constraints, so discrete
/// inputs are reproduced exactly.
class FortinOperators {
public:
  enum class Corrupt { None, DivdivVector, Ddiv, DualBasis };

  explicit FortinOperators(Corrupt corrupt = Corrupt::None);

  /// H^2 component: dual-basis operator plus P^1 kernel reproduction;
  /// input and output are polynomials on the physical element (degree <= 6).
  Poly apply_ggrad(const TriGeom& g, const Poly& z) const;

  /// Combined H(Div,div) component; returns (P^{4,s}, P^3 vector) fields.
  std::pair<SymPoly, VecPoly> apply_divdiv_vector(const TriGeom& g, const SymPoly& Xi,
                                                  const VecPoly& tau) const;

  /// H(div div) component; returns a P^{4,s} field.
  SymPoly apply_ddiv(const TriGeom& g, const SymPoly& Q) const;

  struct RankReport {
    int rows = 0, cols = 0;
    double sigma_min = 0.0, sigma_max = 0.0;
  };
  struct Certificates {
    RankReport divdiv_vector;
    RankReport ddiv;
    double det_A = 0.0;
    double det_A3 = 0.0;
    double A1_subdiag_max = 0.0; ///< below-diagonal magnitude of A1 (expect 0)
    double A_lower_left_max = 0.0;
    bool pass(double sigma_tol, double det_tol = 1e-6, double structure_tol = 1e-13) const;
    std::string failed_blocks(double sigma_tol, double det_tol = 1e-6,
                              double structure_tol = 1e-13) const;
  };
  Certificates certify() const;

  /// Max residuals of the Fortin orthogonality and commutativity relations
  /// over n random degree-6 surrogates on random shape-regular elements.
  struct OrthReport {
    std::map<std::string, double> residuals;
    double max_all() const;
  };
  OrthReport verify_orthogonality(int n, uint64_t seed) const;

  /// Largest ratio ||Pi v||_V / ||v||_V over the degree-6 surrogate space
  /// (computed exactly as a generalized eigenvalue, i.e. the worst case over
  /// every random surrogate) on random shape-regular elements at sizes
  /// h in {1, 1/2, 1/4, 1/8}. Also verifies reproduction of discrete inputs
  /// and the transform equivariance of the operators across scales.
  struct BoundednessReport {
    std::array<double, 4> max_ratio_per_h{};
    double max_ratio = 0.0;
    double ratio_variation = 0.0;       ///< spread of the max ratio across h
    double discrete_identity_dev = 0.0; ///< deviation from identity on V_h
    double equivariance_dev = 0.0;      ///< reference-norm ratio drift across h
  };
  BoundednessReport verify_boundedness(int n, uint64_t seed) const;

  const DualBasisGG& dual_basis() const { return dual_; }

private:
  struct Saddle {
    Eigen::MatrixXd A, C;
    Eigen::MatrixXd Cw; ///< whitened constraints L^{-1} C
    Eigen::LLT<Eigen::MatrixXd> lltA;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr; ///< QR of Cw
    Eigen::VectorXd solve(const Eigen::VectorXd& b, const Eigen::VectorXd& d) const;
  };

  Eigen::VectorXd divdiv_vector_ref(const SymPoly& Xihat, const VecPoly& tauhat) const;
  SymPoly expand_tensor(const Eigen::VectorXd& x, int offset) const;
  VecPoly expand_vector(const Eigen::VectorXd& x, int offset) const;

  DualBasisGG dual_;
  SymTensorBasis xb_;  // P^{4,s}, 45
  VectorBasis vb_;     // P^3 vector, 20
  ScalarBasis p2_;     // P^2 scalars (commutativity projections)
  Saddle dv_;          // 65 x 35
  Saddle dd_;          // 45 x 15
  EdgeRule er_;
  Corrupt corrupt_;
};

/// Physical-element L2 projection onto P^p (exact for polynomial input).
Poly l2_project_phys(const AffineMap& m, const Poly& f, int p);

/// Exact integral of a polynomial over a physical triangle.
double integrate_phys(const AffineMap& m, const Poly& p);
double norm_phys(const AffineMap& m, const Poly& p);
double norm_phys(const AffineMap& m, const VecPoly& p);
double norm_phys(const AffineMap& m, const SymPoly& p);

} // namespace platedpg

#endif
