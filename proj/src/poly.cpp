#include "platedpg/poly.hpp"

#include <cmath>
#include <stdexcept>

namespace platedpg {

Poly::Poly(int degree) : degree_(degree) {
  if (degree >= 0) c_ = Eigen::VectorXd::Zero(dim(degree));
}

Poly Poly::constant(double c) {
  Poly p(0);
  p.c_[0] = c;
  return p;
}

Poly Poly::monomial(int px, int py, double c) {
  Poly p(px + py);
  p.c_[index(px, py)] = c;
  return p;
}

double Poly::coeff(int px, int py) const {
  if (px + py > degree_) return 0.0;
  return c_[index(px, py)];
}

double& Poly::at(int px, int py) {
  if (px + py > degree_) throw std::out_of_range("Poly::at beyond degree");
  return c_[index(px, py)];
}

double Poly::operator()(double x, double y) const {
  if (degree_ < 0) return 0.0;
  std::array<double, 32> xs{}, ys{};
  xs[0] = ys[0] = 1.0;
  for (int d = 1; d <= degree_; ++d) {
    xs[d] = xs[d - 1] * x;
    ys[d] = ys[d - 1] * y;
  }
  double out = 0.0;
  int k = 0;
  for (int d = 0; d <= degree_; ++d)
    for (int j = 0; j <= d; ++j, ++k) out += c_[k] * xs[d - j] * ys[j];
  return out;
}

Poly Poly::dx() const {
  if (degree_ <= 0) return Poly();
  Poly out(degree_ - 1);
  for (int d = 1; d <= degree_; ++d)
    for (int j = 0; j <= d; ++j) {
      int i = d - j;
      if (i > 0) out.c_[index(i - 1, j)] += c_[index(i, j)] * i;
    }
  return out;
}

Poly Poly::dy() const {
  if (degree_ <= 0) return Poly();
  Poly out(degree_ - 1);
  for (int d = 1; d <= degree_; ++d)
    for (int j = 0; j <= d; ++j) {
      int i = d - j;
      if (j > 0) out.c_[index(i, j - 1)] += c_[index(i, j)] * j;
    }
  return out;
}

Poly Poly::operator+(const Poly& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  Poly out(std::max(degree_, o.degree_));
  out.c_.head(c_.size()) = c_;
  out.c_.head(o.c_.size()) += o.c_;
  return out;
}

Poly Poly::operator-(const Poly& o) const { return *this + o * (-1.0); }

Poly& Poly::operator+=(const Poly& o) {
  *this = *this + o;
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  *this = *this - o;
  return *this;
}

Poly Poly::operator*(const Poly& o) const {
  if (is_zero() || o.is_zero()) return Poly();
  Poly out(degree_ + o.degree_);
  for (int d = 0; d <= degree_; ++d)
    for (int j = 0; j <= d; ++j) {
      double a = c_[index(d - j, j)];
      if (a == 0.0) continue;
      for (int e = 0; e <= o.degree_; ++e)
        for (int l = 0; l <= e; ++l) {
          double b = o.c_[index(e - l, l)];
          if (b == 0.0) continue;
          out.c_[index(d - j + e - l, j + l)] += a * b;
        }
    }
  return out;
}

Poly Poly::operator*(double s) const {
  Poly out = *this;
  out.c_ *= s;
  return out;
}

Poly Poly::compose_affine(const Mat2& B, const Vec2& a) const {
  if (is_zero()) return Poly();
  // x -> b00 xh + b01 yh + a0 ; y -> b10 xh + b11 yh + a1
  Poly X(1), Y(1);
  X.at(0, 0) = a[0]; X.at(1, 0) = B(0, 0); X.at(0, 1) = B(0, 1);
  Y.at(0, 0) = a[1]; Y.at(1, 0) = B(1, 0); Y.at(0, 1) = B(1, 1);
  std::vector<Poly> xpow(degree_ + 1), ypow(degree_ + 1);
  xpow[0] = Poly::constant(1.0);
  ypow[0] = Poly::constant(1.0);
  for (int d = 1; d <= degree_; ++d) {
    xpow[d] = xpow[d - 1] * X;
    ypow[d] = ypow[d - 1] * Y;
  }
  Poly out(degree_);
  for (int d = 0; d <= degree_; ++d)
    for (int j = 0; j <= d; ++j) {
      double c = c_[index(d - j, j)];
      if (c != 0.0) out += (xpow[d - j] * ypow[j]) * c;
    }
  return out;
}

namespace {
double factorial_d(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}
} // namespace

double Poly::integral_ref() const {
  long double out = 0.0L;
  for (int d = 0; d <= degree_; ++d)
    for (int j = 0; j <= d; ++j) {
      double c = c_[index(d - j, j)];
      if (c != 0.0)
        out += (long double)c * factorial_d(d - j) * factorial_d(j) / factorial_d(d + 2);
    }
  return double(out);
}

Poly Poly::trimmed(double tol) const {
  int d = degree_;
  while (d >= 0) {
    bool all_zero = true;
    for (int j = 0; j <= d; ++j)
      if (std::abs(coeff(d - j, j)) > tol) { all_zero = false; break; }
    if (!all_zero) break;
    --d;
  }
  if (d == degree_) return *this;
  Poly out(d);
  if (d >= 0) out.c_ = c_.head(dim(d));
  return out;
}

VecPoly grad(const Poly& p) { return {p.dx(), p.dy()}; }

SymPoly hess(const Poly& p) { return {p.dx().dx(), p.dy().dy(), p.dx().dy()}; }

// accumulated in extended precision: orthonormalized coefficients reach 1e3
// and the pairwise products cancel down to O(1)
double ip_ref(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return 0.0;
  long double out = 0.0L;
  for (int d = 0; d <= a.degree(); ++d)
    for (int j = 0; j <= d; ++j) {
      const double ca = a.coeff(d - j, j);
      if (ca == 0.0) continue;
      for (int e = 0; e <= b.degree(); ++e)
        for (int l = 0; l <= e; ++l) {
          const double cb = b.coeff(e - l, l);
          if (cb == 0.0) continue;
          out += (long double)ca * cb * factorial_d(d - j + e - l) * factorial_d(j + l) /
                 factorial_d(d + e + 2);
        }
    }
  return double(out);
}

double ip_ref(const VecPoly& a, const VecPoly& b) {
  return (a.x * b.x + a.y * b.y).integral_ref();
}

double ip_ref(const SymPoly& a, const SymPoly& b) {
  return (a.xx * b.xx + a.yy * b.yy + a.xy * b.xy * 2.0).integral_ref();
}

std::vector<Poly> monomial_basis(int p) {
  std::vector<Poly> out;
  out.reserve(Poly::dim(p));
  for (int d = 0; d <= p; ++d)
    for (int j = 0; j <= d; ++j) out.push_back(Poly::monomial(d - j, j));
  return out;
}

namespace {

// Gram-Schmidt through extended-precision Cholesky of the exact monomial
// Gram matrix. Monomial mass matrices up to degree 6 are ill-conditioned
// enough that double-precision Cholesky would cost ~3 digits here.
std::vector<Poly> orthonormal_scalar(int degree) {
  using LD = long double;
  const int n = Poly::dim(degree);
  auto mono = monomial_basis(degree);
  Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic> M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      // exact rational value of int_T x^(ii+ij) y^(ji+jj)
      auto exps = [](int k) {
        int d = 0;
        while ((d + 1) * (d + 2) / 2 <= k) ++d;
        int j = k - d * (d + 1) / 2;
        return std::pair<int, int>(d - j, j);
      };
      auto [ia, ja] = exps(i);
      auto [ib, jb] = exps(j);
      LD num = 1.0L, den = 1.0L;
      for (int t = 2; t <= ia + ib; ++t) num *= t;
      for (int t = 2; t <= ja + jb; ++t) num *= t;
      for (int t = 2; t <= ia + ib + ja + jb + 2; ++t) den *= t;
      M(i, j) = M(j, i) = num / den;
    }
  // Cholesky M = L L^T
  Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic> L =
      Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    LD s = M(j, j);
    for (int k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
    L(j, j) = std::sqrt((long double)s);
    for (int i = j + 1; i < n; ++i) {
      LD t = M(i, j);
      for (int k = 0; k < j; ++k) t -= L(i, k) * L(j, k);
      L(i, j) = t / L(j, j);
    }
  }
  // phi_j = sum_i (L^{-T})_{ij} m_i : solve L^T X = I column-wise
  std::vector<Poly> out(n);
  for (int j = 0; j < n; ++j) {
    Eigen::Matrix<LD, Eigen::Dynamic, 1> x = Eigen::Matrix<LD, Eigen::Dynamic, 1>::Zero(n);
    x[j] = 1.0L;
    for (int i = n - 1; i >= 0; --i) {
      LD s = x[i];
      for (int k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
      x[i] = s / L(i, i);
    }
    Poly p(degree);
    for (int i = 0; i < n; ++i) p.coeffs()[i] = double(x[i]);
    out[j] = p;
  }
  // one re-orthonormalization pass against the exact Gram of the result;
  // the first factorization pays ~eps*cond(M), the second starts from a
  // near-identity Gram
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) G(i, j) = G(j, i) = ip_ref(out[i], out[j]);
  const Eigen::MatrixXd L2 = Eigen::LLT<Eigen::MatrixXd>(G).matrixL();
  const Eigen::MatrixXd corr = L2.inverse().transpose();
  std::vector<Poly> fixed(n);
  for (int j = 0; j < n; ++j) {
    Poly p(degree);
    for (int i = 0; i < n; ++i) p += out[i] * corr(i, j);
    fixed[j] = p;
  }
  return fixed;
}

} // namespace

ScalarBasis::ScalarBasis(int degree) : degree_(degree), fns_(orthonormal_scalar(degree)) {}

VectorBasis::VectorBasis(int degree) : degree_(degree) {
  ScalarBasis s(degree);
  fns_.reserve(2 * s.size());
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < s.size(); ++i) {
      VecPoly v;
      (c == 0 ? v.x : v.y) = s[i];
      fns_.push_back(v);
    }
}

SymTensorBasis::SymTensorBasis(int degree) : degree_(degree) {
  ScalarBasis s(degree);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  fns_.reserve(3 * s.size());
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < s.size(); ++i) {
      SymPoly t;
      if (c == 0) t.xx = s[i];
      else if (c == 1) t.yy = s[i];
      else t.xy = s[i] * inv_sqrt2;
      fns_.push_back(t);
    }
}

namespace {

// The monomial normal equations of the projection have condition ~1e7 at
// degree 4; to hand back degree-p inputs coefficient-exactly the right-hand
// side and the solve run in quadruple precision.
using Quad = __float128;

Quad quad_factorial(int n) {
  Quad f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Quad mono_pair_integral(int ia, int ja, int ib, int jb) {
  return quad_factorial(ia + ib) * quad_factorial(ja + jb) /
         quad_factorial(ia + ib + ja + jb + 2);
}

std::pair<int, int> mono_exps(int k) {
  int d = 0;
  while ((d + 1) * (d + 2) / 2 <= k) ++d;
  const int j = k - d * (d + 1) / 2;
  return {d - j, j};
}

// LDL^T (no square roots, so plain __float128 arithmetic suffices)
std::vector<Quad> ldlt_solve_quad(std::vector<Quad> M, std::vector<Quad> b, int n) {
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) {
      const Quad ljk = M[j * n + k];
      for (int i = j; i < n; ++i) M[i * n + j] -= M[i * n + k] * ljk * M[k * n + k];
    }
    const Quad d = M[j * n + j];
    for (int i = j + 1; i < n; ++i) M[i * n + j] /= d;
  }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < i; ++k) b[i] -= M[i * n + k] * b[k];
  for (int i = 0; i < n; ++i) b[i] /= M[i * n + i];
  for (int i = n - 1; i >= 0; --i)
    for (int k = i + 1; k < n; ++k) b[i] -= M[k * n + i] * b[k];
  return b;
}

} // namespace

Poly l2_project_ref(const Poly& f, int p) {
  if (p < 0 || f.is_zero()) return Poly();
  const int n = Poly::dim(p);
  const int nf = Poly::dim(f.degree());
  std::vector<Quad> b(n, Quad(0));
  for (int k = 0; k < n; ++k) {
    auto [ik, jk] = mono_exps(k);
    for (int l = 0; l < nf; ++l) {
      const double c = f.coeffs()[l];
      if (c == 0.0) continue;
      auto [il, jl] = mono_exps(l);
      b[k] += Quad(c) * mono_pair_integral(il, jl, ik, jk);
    }
  }
  std::vector<Quad> M(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto [ia, ja] = mono_exps(i);
      auto [ib, jb] = mono_exps(j);
      M[i * n + j] = mono_pair_integral(ia, ja, ib, jb);
    }
  const std::vector<Quad> c = ldlt_solve_quad(std::move(M), std::move(b), n);
  Poly out(p);
  for (int i = 0; i < n; ++i) out.coeffs()[i] = double(c[i]);
  return out;
}

VecPoly l2_project_ref(const VecPoly& f, int p) {
  return {l2_project_ref(f.x, p), l2_project_ref(f.y, p)};
}

SymPoly l2_project_ref(const SymPoly& f, int p) {
  return {l2_project_ref(f.xx, p), l2_project_ref(f.yy, p), l2_project_ref(f.xy, p)};
}

} // namespace platedpg
