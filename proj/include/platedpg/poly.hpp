#ifndef PLATEDPG_POLY_HPP
#define PLATEDPG_POLY_HPP

#include <array>
#include <vector>

#include "platedpg/common.hpp"

namespace platedpg {

/// Bivariate polynomial in dense monomial coefficients, graded-lex order:
/// index of x^(d-j) y^j is d(d+1)/2 + j. All operations are exact coefficient
/// maps, so polynomial identities hold to roundoff regardless of basis
/// conditioning.
class Poly {
public:
  Poly() = default; ///< zero polynomial of degree -1
  explicit Poly(int degree);

  static Poly constant(double c);
  static Poly monomial(int px, int py, double c = 1.0);

  static int dim(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }
  static int index(int px, int py) { return (px + py) * (px + py + 1) / 2 + py; }

  int degree() const { return degree_; }
  bool is_zero() const { return degree_ < 0; }
  double coeff(int px, int py) const;
  double& at(int px, int py);
  const Eigen::VectorXd& coeffs() const { return c_; }
  Eigen::VectorXd& coeffs() { return c_; }

  double operator()(double x, double y) const;
  double operator()(const Vec2& p) const { return (*this)(p.x(), p.y()); }

  Poly dx() const;
  Poly dy() const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(double s) const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);

  /// p(B xhat + a) as a polynomial in xhat (exact affine substitution).
  Poly compose_affine(const Mat2& B, const Vec2& a) const;

  /// Exact integral over the reference triangle conv{(0,0),(1,0),(0,1)},
  /// using  int x^i y^j = i! j! / (i+j+2)!.
  double integral_ref() const;

  double max_abs_coeff() const { return degree_ < 0 ? 0.0 : c_.cwiseAbs().maxCoeff(); }

  /// Drops trailing zero coefficient blocks (tol on |coeff|).
  Poly trimmed(double tol = 0.0) const;

private:
  int degree_ = -1;
  Eigen::VectorXd c_;
};

inline Poly operator*(double s, const Poly& p) { return p * s; }

/// 2-vector of polynomials.
struct VecPoly {
  Poly x, y;
  Vec2 operator()(const Vec2& p) const { return Vec2(x(p), y(p)); }
  Poly div() const { return x.dx() + y.dy(); }
  VecPoly operator+(const VecPoly& o) const { return {x + o.x, y + o.y}; }
  VecPoly operator-(const VecPoly& o) const { return {x - o.x, y - o.y}; }
  VecPoly operator*(double s) const { return {x * s, y * s}; }
  int max_degree() const { return std::max(x.degree(), y.degree()); }
};

/// Symmetric 2x2 tensor of polynomials stored as (xx, yy, xy).
struct SymPoly {
  Poly xx, yy, xy;
  Vec3 operator()(const Vec2& p) const { return Vec3(xx(p), yy(p), xy(p)); }
  Mat2 matrix_at(const Vec2& p) const {
    Mat2 m;
    m << xx(p), xy(p), xy(p), yy(p);
    return m;
  }
  /// Row-wise divergence (dx xx + dy xy, dx xy + dy yy).
  VecPoly Div() const { return {xx.dx() + xy.dy(), xy.dx() + yy.dy()}; }
  Poly divdiv() const { return xx.dx().dx() + yy.dy().dy() + xy.dx().dy() * 2.0; }
  SymPoly operator+(const SymPoly& o) const { return {xx + o.xx, yy + o.yy, xy + o.xy}; }
  SymPoly operator-(const SymPoly& o) const { return {xx - o.xx, yy - o.yy, xy - o.xy}; }
  SymPoly operator*(double s) const { return {xx * s, yy * s, xy * s}; }
  int max_degree() const { return std::max(std::max(xx.degree(), yy.degree()), xy.degree()); }
};

VecPoly grad(const Poly& p);
SymPoly hess(const Poly& p);

/// Exact L2(reference triangle) inner products.
double ip_ref(const Poly& a, const Poly& b);
double ip_ref(const VecPoly& a, const VecPoly& b);
/// Tensor product with doubled off-diagonal weight.
double ip_ref(const SymPoly& a, const SymPoly& b);

/// Monomials of total degree <= p in graded-lex order.
std::vector<Poly> monomial_basis(int p);

/// L2(reference triangle)-orthonormal scalar basis of P^p, p <= 4 + margin.
/// Built by Cholesky of the exact monomial Gram matrix in extended precision.
class ScalarBasis {
public:
  explicit ScalarBasis(int degree);
  int degree() const { return degree_; }
  int size() const { return int(fns_.size()); }
  const Poly& operator[](int i) const { return fns_[i]; }
  const std::vector<Poly>& functions() const { return fns_; }

private:
  int degree_;
  std::vector<Poly> fns_;
};

/// Orthonormal vector basis of P^p(ref)^2: (phi_i, 0), (0, phi_i).
class VectorBasis {
public:
  explicit VectorBasis(int degree);
  int degree() const { return degree_; }
  int size() const { return int(fns_.size()); }
  const VecPoly& operator[](int i) const { return fns_[i]; }

private:
  int degree_;
  std::vector<VecPoly> fns_;
};

/// Orthonormal symmetric-tensor basis of P^{p,s}(ref): per scalar mode the
/// (xx), (yy) unit tensors and the xy tensor scaled by 1/sqrt(2) so the
/// weighted inner product is orthonormal.
class SymTensorBasis {
public:
  explicit SymTensorBasis(int degree);
  int degree() const { return degree_; }
  int size() const { return int(fns_.size()); }
  const SymPoly& operator[](int i) const { return fns_[i]; }

private:
  int degree_;
  std::vector<SymPoly> fns_;
};

/// L2(reference triangle) projection of a polynomial onto P^p (exact).
Poly l2_project_ref(const Poly& f, int p);
VecPoly l2_project_ref(const VecPoly& f, int p);
SymPoly l2_project_ref(const SymPoly& f, int p);

} // namespace platedpg

#endif
