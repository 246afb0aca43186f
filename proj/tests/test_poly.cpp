#include <doctest.h>

#include <random>

#include "platedpg/poly.hpp"
#include "platedpg/quadrature.hpp"

using namespace platedpg;

namespace {
Poly rand_poly(std::mt19937_64& rng, int deg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Poly p(deg);
  for (int i = 0; i < Poly::dim(deg); ++i) p.coeffs()[i] = u(rng);
  return p;
}
} // namespace

TEST_SUITE_BEGIN("poly");

TEST_CASE("eval, gradient, hessian") {
  // z = x^2 -> Hessian [[2,0],[0,0]] everywhere
  const Poly z1 = Poly::monomial(2, 0);
  const SymPoly h1 = hess(z1);
  for (double x : {0.1, 0.5, 0.9}) {
    CHECK(h1.xx(Vec2(x, 0.2)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(h1.yy(Vec2(x, 0.2)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(h1.xy(Vec2(x, 0.2)) == doctest::Approx(0.0).epsilon(1e-14));
  }
  // affine z -> zero Hessian
  Poly za(1);
  za.at(0, 0) = 3.0;
  za.at(1, 0) = -2.0;
  za.at(0, 1) = 0.5;
  const SymPoly ha = hess(za);
  CHECK(ha.xx.is_zero());
  CHECK(ha.yy.is_zero());
  CHECK(ha.xy.is_zero());
  // z = x^2 y -> grad(1,1) = (2,1)
  const Poly z2 = Poly::monomial(2, 1);
  const VecPoly g2 = grad(z2);
  CHECK(g2.x(Vec2(1, 1)) == doctest::Approx(2.0));
  CHECK(g2.y(Vec2(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("divergence operators") {
  // Theta = [[x^2, 0], [0, y^2]]
  SymPoly Th{Poly::monomial(2, 0), Poly::monomial(0, 2), Poly()};
  const VecPoly D = Th.Div();
  CHECK(D.x(Vec2(0.3, 0.7)) == doctest::Approx(0.6));
  CHECK(D.y(Vec2(0.3, 0.7)) == doctest::Approx(1.4));
  CHECK(Th.divdiv()(Vec2(0.3, 0.7)) == doctest::Approx(4.0));
  // constant tensor -> Div = 0
  SymPoly Tc{Poly::constant(2.0), Poly::constant(-1.0), Poly::constant(0.5)};
  CHECK(Tc.Div().x.is_zero());
  CHECK(Tc.Div().y.is_zero());
  // tau = (y, -x) -> div = 0
  VecPoly tau{Poly::monomial(0, 1), Poly::monomial(1, 0) * (-1.0)};
  CHECK(tau.div().max_abs_coeff() == 0.0);
}

TEST_CASE("L2 projection on the reference triangle") {
  // P0 of x: centroid mean 1/3
  const Poly p0x = l2_project_ref(Poly::monomial(1, 0), 0);
  CHECK(p0x(Vec2(0.2, 0.2)) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  // P0 of x^2: int x^2 = 1/12, area 1/2 -> 1/6
  const Poly p0x2 = l2_project_ref(Poly::monomial(2, 0), 0);
  CHECK(p0x2(Vec2(0.2, 0.2)) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  // projection of a degree-p polynomial is the identity (coefficientwise)
  std::mt19937_64 rng(7);
  for (int p : {1, 2, 3, 4}) {
    const Poly f = rand_poly(rng, p);
    CHECK((l2_project_ref(f, p) - f).max_abs_coeff() < 1e-12);
  }
  // Galerkin orthogonality by quadrature
  const Poly f = rand_poly(rng, 6);
  const Poly pf = l2_project_ref(f, 2);
  const QuadratureRule q = triangle_quadrature(10);
  for (const Poly& m : monomial_basis(2)) {
    double acc = 0.0;
    for (int i = 0; i < q.size(); ++i)
      acc += q.weights[i] * (f(q.point(i)) - pf(q.point(i))) * m(q.point(i));
    CHECK(std::abs(acc) < 1e-13);
  }
}

TEST_CASE("quadrature rules") {
  // triangle rule d = 2 applied to x y -> 1/24 (analytic oracle 1!1!/4! = 1/24)
  {
    const QuadratureRule q = triangle_quadrature(2);
    double acc = 0.0;
    for (int i = 0; i < q.size(); ++i) acc += q.weights[i] * q.point(i).x() * q.point(i).y();
    CHECK(acc == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
    CHECK(q.weights.minCoeff() > 0.0);
  }
  // edge rule d = 5 on s^5 -> 1/6
  {
    const EdgeRule e = edge_quadrature(5);
    double acc = 0.0;
    for (int i = 0; i < e.size(); ++i) acc += e.w[i] * std::pow(e.s[i], 5);
    CHECK(acc == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  }
  // constant over the reference triangle -> 1/2
  {
    const QuadratureRule q = triangle_quadrature(0);
    CHECK(q.weights.sum() == doctest::Approx(0.5).epsilon(1e-15));
  }
  // monomial exactness at the stated degree, all rules
  for (int d = 1; d <= 12; ++d) {
    const QuadratureRule q = triangle_quadrature(d);
    CHECK(q.weights.minCoeff() > 0.0);
    for (int i = 0; i <= d; ++i) {
      const int j = d - i;
      const Poly m = Poly::monomial(i, j);
      double acc = 0.0;
      for (int k = 0; k < q.size(); ++k) acc += q.weights[k] * m(q.point(k));
      CHECK(std::abs(acc - m.integral_ref()) <=
            1e-13 * std::max(1.0, std::abs(m.integral_ref())));
    }
  }
  CHECK_THROWS(triangle_quadrature(13));
  // barycentric coordinates sum to one
  const QuadratureRule q = triangle_quadrature(4);
  for (int i = 0; i < q.size(); ++i) CHECK(q.barycentric(i).sum() == doctest::Approx(1.0));
}

TEST_CASE("orthonormal bases") {
  for (int p : {0, 1, 2, 3, 4}) {
    const ScalarBasis b(p);
    REQUIRE(b.size() == (p + 1) * (p + 2) / 2);
    for (int i = 0; i < b.size(); ++i)
      for (int j = i; j < b.size(); ++j)
        CHECK(std::abs(ip_ref(b[i], b[j]) - (i == j ? 1.0 : 0.0)) < 1e-12);
  }
  const SymTensorBasis tb(1);
  for (int i = 0; i < tb.size(); ++i)
    for (int j = i; j < tb.size(); ++j)
      CHECK(std::abs(ip_ref(tb[i], tb[j]) - (i == j ? 1.0 : 0.0)) < 1e-12);
}

// underlies every trace pairing: int_T div tau z + int_T tau . grad z = bnd (n.tau) z
TEST_CASE("product rule via triangle and edge quadrature") {
  std::mt19937_64 rng(11);
  const QuadratureRule vq = triangle_quadrature(10);
  const EdgeRule er = edge_quadrature(11);
  const Vec2 verts[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  for (int rep = 0; rep < 20; ++rep) {
    const VecPoly tau{rand_poly(rng, 3), rand_poly(rng, 3)};
    const Poly z = rand_poly(rng, 3);
    const Poly dv = tau.div();
    const VecPoly gz = grad(z);
    double vol = 0.0;
    for (int q = 0; q < vq.size(); ++q) {
      const Vec2 x = vq.point(q);
      vol += vq.weights[q] * (dv(x) * z(x) + tau.x(x) * gz.x(x) + tau.y(x) * gz.y(x));
    }
    double bnd = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = verts[k], b = verts[(k + 1) % 3];
      const double L = (b - a).norm();
      const Vec2 t = (b - a) / L;
      const Vec2 n(t.y(), -t.x());
      for (int q = 0; q < er.size(); ++q) {
        const Vec2 x = a + er.s[q] * (b - a);
        bnd += er.w[q] * L * (n.x() * tau.x(x) + n.y() * tau.y(x)) * z(x);
      }
    }
    CHECK(std::abs(vol - bnd) < 1e-12);
  }
}

// int_T (div Div Th) z - int_T Th : Hess z = bnd (n.Div Th) z - bnd (Th n).grad z
TEST_CASE("double integration by parts") {
  std::mt19937_64 rng(13);
  const QuadratureRule vq = triangle_quadrature(10);
  const EdgeRule er = edge_quadrature(11);
  const Vec2 verts[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  for (int rep = 0; rep < 20; ++rep) {
    const SymPoly Th{rand_poly(rng, 4), rand_poly(rng, 4), rand_poly(rng, 4)};
    const Poly z = rand_poly(rng, 3);
    const Poly dd = Th.divdiv();
    const VecPoly D = Th.Div();
    const SymPoly hz = hess(z);
    const VecPoly gz = grad(z);
    double vol = 0.0;
    for (int q = 0; q < vq.size(); ++q) {
      const Vec2 x = vq.point(q);
      vol += vq.weights[q] * (dd(x) * z(x) - (Th.xx(x) * hz.xx(x) + Th.yy(x) * hz.yy(x) +
                                              2 * Th.xy(x) * hz.xy(x)));
    }
    double bnd = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = verts[k], b = verts[(k + 1) % 3];
      const double L = (b - a).norm();
      const Vec2 t = (b - a) / L;
      const Vec2 n(t.y(), -t.x());
      for (int q = 0; q < er.size(); ++q) {
        const Vec2 x = a + er.s[q] * (b - a);
        const Vec2 Dn(Th.xx(x) * n.x() + Th.xy(x) * n.y(), Th.xy(x) * n.x() + Th.yy(x) * n.y());
        bnd += er.w[q] * L *
               ((n.x() * D.x(x) + n.y() * D.y(x)) * z(x) - Dn.dot(Vec2(gz.x(x), gz.y(x))));
      }
    }
    CHECK(std::abs(vol - bnd) < 1e-12);
  }
}

TEST_CASE("affine composition is exact") {
  std::mt19937_64 rng(17);
  Mat2 B;
  B << 1.5, -0.3, 0.2, 0.8;
  const Vec2 a(0.4, -0.1);
  for (int rep = 0; rep < 5; ++rep) {
    const Poly p = rand_poly(rng, 4);
    const Poly c = p.compose_affine(B, a);
    for (int s = 0; s < 10; ++s) {
      const Vec2 x(0.1 * s, 0.05 * s);
      CHECK(c(x) == doctest::Approx(p(B * x + a)).epsilon(1e-12));
    }
  }
}

TEST_SUITE_END();
