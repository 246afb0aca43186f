#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "platedpg/problems.hpp"
#include "platedpg/trace_spaces.hpp"

using namespace platedpg;

namespace {
std::mt19937_64 rng(31);

Poly rand_poly(int deg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Poly p(deg);
  for (int i = 0; i < Poly::dim(deg); ++i) p.coeffs()[i] = u(rng);
  return p;
}

const TriGeom kRef{{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}};

UhatElemDofs sample_dofs(const TriGeom& g, const Poly& z) {
  const VecPoly gz = grad(z);
  UhatElemDofs d{};
  for (int m = 0; m < 3; ++m) {
    d[3 * m] = z(g.p[m]);
    d[3 * m + 1] = gz.x(g.p[m]);
    d[3 * m + 2] = gz.y(g.p[m]);
  }
  return d;
}

// independent cubic Hermite oracle on [0,1]
double hermite_oracle(double va, double ma, double vb, double mb, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * va + (s3 - 2 * s2 + s) * ma + (-2 * s3 + 3 * s2) * vb +
         (s3 - s2) * mb;
}

// volume form of the combined trace duality:
// int (div tau) z + int (tau - Div Xi).grad z - int Xi : Hess z
double volume_duality(const TriGeom& g, const Poly& z, const SymPoly& Xi, const VecPoly& tau) {
  const AffineMap m = g.map();
  const VecPoly gz = grad(z), mis = tau - Xi.Div();
  const SymPoly hz = hess(z);
  const Poly integrand = tau.div() * z + mis.x * gz.x + mis.y * gz.y -
                         (Xi.xx * hz.xx + Xi.yy * hz.yy + Xi.xy * hz.xy * 2.0);
  return m.J * integrand.compose_affine(m.B, m.a).integral_ref();
}
} // namespace

TEST_SUITE_BEGIN("trace_spaces");

TEST_CASE("edge trace of globally affine data") {
  // dofs sampled from v = x: value trace is the linear restriction and the
  // gradient trace is identically (1,0)
  const Poly vx = Poly::monomial(1, 0);
  const UhatElemDofs d = sample_dofs(kRef, vx);
  const EdgeRule er = edge_quadrature(7);
  for (int k = 0; k < 3; ++k) {
    const EdgeTrace tr = edge_trace(kRef, d, k);
    for (int q = 0; q < er.size(); ++q) {
      const double s = er.s[q];
      const Vec2 x = tr.f.at(s);
      CHECK(tr.value(s) == doctest::Approx(x.x()).epsilon(1e-13));
      CHECK((tr.gradient(s) - Vec2(1, 0)).norm() < 1e-13);
    }
  }
  // all-zero dofs give zero traces
  const UhatElemDofs z{};
  const EdgeTrace tr = edge_trace(kRef, z, 1);
  CHECK(tr.value(0.37) == 0.0);
  CHECK(tr.gradient(0.37).norm() == 0.0);
}

TEST_CASE("edge trace is the Hermite interpolant") {
  const Poly v = Poly::monomial(2, 1); // x^2 y
  const TriGeom g{{Vec2(0.2, 0.1), Vec2(1.3, 0.4), Vec2(0.5, 1.2)}};
  const UhatElemDofs d = sample_dofs(g, v);
  const VecPoly gv = grad(v);
  for (int k = 0; k < 3; ++k) {
    const EdgeTrace tr = edge_trace(g, d, k);
    const int ia = k, ib = (k + 1) % 3;
    const double L = tr.f.length;
    // endpoint data reproduced
    CHECK(tr.value(0.0) == doctest::Approx(v(g.p[ia])).epsilon(1e-13));
    CHECK(tr.value(1.0) == doctest::Approx(v(g.p[ib])).epsilon(1e-13));
    CHECK((tr.gradient(0.0) - gv(g.p[ia])).norm() < 1e-12);
    CHECK((tr.gradient(1.0) - gv(g.p[ib])).norm() < 1e-12);
    // interior values match the independent Hermite formula
    for (double s : {0.25, 0.5, 0.75}) {
      const double oracle =
          hermite_oracle(v(g.p[ia]), L * tr.f.t.dot(gv(g.p[ia])), v(g.p[ib]),
                         L * tr.f.t.dot(gv(g.p[ib])), s);
      CHECK(tr.value(s) == doctest::Approx(oracle).epsilon(1e-13));
    }
  }
}

TEST_CASE("uhat pairing examples") {
  const EdgeRule er = edge_quadrature(11);
  // zero data -> 0
  {
    const UhatElemDofs z{};
    const SymPoly Xi{rand_poly(4), rand_poly(4), rand_poly(4)};
    const VecPoly tau{rand_poly(3), rand_poly(3)};
    CHECK(pair_uhat_divdiv_vector(kRef, z, Xi, tau, er) == doctest::Approx(0.0));
  }
  // v = x, tau = (1,0), Xi = 0: divergence-theorem oracle bnd n_x x = |T| = 1/2
  {
    const UhatElemDofs d = sample_dofs(kRef, Poly::monomial(1, 0));
    const VecPoly tau{Poly::constant(1.0), Poly()};
    const SymPoly Xi{};
    CHECK(pair_uhat_divdiv_vector(kRef, d, Xi, tau, er) ==
          doctest::Approx(0.5).epsilon(1e-13));
  }
  // data sampled from z in P2: edge pairing equals the volume duality
  for (int rep = 0; rep < 10; ++rep) {
    const TriGeom g{{Vec2(0.1, 0.0), Vec2(1.2, 0.3), Vec2(0.4, 1.1)}};
    const Poly z = rand_poly(2);
    const UhatElemDofs d = sample_dofs(g, z);
    const SymPoly Xi{rand_poly(4), rand_poly(4), rand_poly(4)};
    const VecPoly tau{rand_poly(3), rand_poly(3)};
    const double lhs = pair_uhat_divdiv_vector(g, d, Xi, tau, er);
    const double rhs = volume_duality(g, z, Xi, tau);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("uhat pairing for the gradient-free space") {
  const EdgeRule er = edge_quadrature(11);
  // constant Theta: Div Theta = 0, pairing reduces to -bnd (Theta n).grad v
  {
    const Poly z = rand_poly(2);
    const UhatElemDofs d = sample_dofs(kRef, z);
    const SymPoly Th{Poly::constant(1.2), Poly::constant(-0.4), Poly::constant(0.3)};
    const double full = pair_uhat_divdiv(kRef, d, Th, er);
    double grad_part = 0.0;
    for (int k = 0; k < 3; ++k) {
      const EdgeTrace tr = edge_trace(kRef, d, k);
      for (int q = 0; q < er.size(); ++q) {
        const Vec2 x = tr.f.at(er.s[q]);
        const Vec2 Tn(Th.xx(x) * tr.f.n.x() + Th.xy(x) * tr.f.n.y(),
                      Th.xy(x) * tr.f.n.x() + Th.yy(x) * tr.f.n.y());
        grad_part -= er.w[q] * tr.f.length * Tn.dot(tr.gradient(er.s[q]));
      }
    }
    CHECK(full == doctest::Approx(grad_part).epsilon(1e-13));
  }
  // embedding consistency: <uhat, Theta> = <uhat, (Theta, Div Theta)>
  for (int rep = 0; rep < 10; ++rep) {
    const TriGeom g{{Vec2(0, 0), Vec2(1.1, 0.2), Vec2(0.3, 0.9)}};
    const UhatElemDofs d = sample_dofs(g, rand_poly(2));
    const SymPoly Th{rand_poly(4), rand_poly(4), rand_poly(4)};
    const double a = pair_uhat_divdiv(g, d, Th, er);
    const double b = pair_uhat_divdiv_vector(g, d, Th, Th.Div(), er);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  // zero dofs -> 0
  const UhatElemDofs z{};
  CHECK(pair_uhat_divdiv(kRef, z, SymPoly{rand_poly(4), rand_poly(4), rand_poly(4)}, er) ==
        doctest::Approx(0.0));
}

TEST_CASE("qhat dual functionals") {
  const EdgeRule er = edge_quadrature(11);
  // c = e1 (first vertex), z == 1 -> 1
  {
    std::array<double, 9> c{};
    c[0] = 1.0;
    CHECK(pair_qhat(kRef, c, Poly::constant(1.0), er) == doctest::Approx(1.0));
  }
  // c = e7 (first normal-derivative), bottom edge of the reference triangle:
  // grad z = (1,0) -> 0 ; grad z = (0,1) -> -1 (n = (0,-1), length 1)
  {
    std::array<double, 9> c{};
    c[6] = 1.0;
    CHECK(pair_qhat(kRef, c, Poly::monomial(1, 0), er) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(pair_qhat(kRef, c, Poly::monomial(0, 1), er) == doctest::Approx(-1.0).epsilon(1e-14));
  }
  // c = e4 (first edge mean), z = x on the bottom edge -> 1/2
  {
    std::array<double, 9> c{};
    c[3] = 1.0;
    CHECK(pair_qhat(kRef, c, Poly::monomial(1, 0), er) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("qhat functionals depend only on the outward normal") {
  // relabeling the element vertices cyclically permutes the functionals but
  // leaves each geometric functional value unchanged
  const TriGeom g{{Vec2(0.1, 0.0), Vec2(1.2, 0.3), Vec2(0.4, 1.1)}};
  const TriGeom rot{{g.p[1], g.p[2], g.p[0]}};
  const EdgeRule er = edge_quadrature(11);
  const Poly z = rand_poly(3);
  const VecPoly gz = grad(z);
  auto zf = [&](const Vec2& x) { return z(x); };
  auto gf = [&](const Vec2& x) { return gz(x); };
  for (int j = 0; j < 3; ++j) {
    CHECK(qhat_functional(g, j, zf, gf, er) ==
          doctest::Approx(qhat_functional(rot, (j + 2) % 3, zf, gf, er)).epsilon(1e-13));
    CHECK(qhat_functional(g, 3 + j, zf, gf, er) ==
          doctest::Approx(qhat_functional(rot, 3 + (j + 2) % 3, zf, gf, er)).epsilon(1e-13));
    CHECK(qhat_functional(g, 6 + j, zf, gf, er) ==
          doctest::Approx(qhat_functional(rot, 6 + (j + 2) % 3, zf, gf, er)).epsilon(1e-13));
  }
}

TEST_CASE("qhat constraint matrix and free dimension") {
  // single triangle: no constraints, dimension 9
  {
    const Mesh one = Mesh::from_seed({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 2}});
    const auto C = assemble_qhat_constraints(one);
    CHECK(C.rows() == 0);
    CHECK(QhatLayout(one).n_free() == 9);
  }
  for (const auto& [mesh, expected] :
       {std::pair<Mesh, int>{make_unit_square_mesh(), 16},
        std::pair<Mesh, int>{make_crisscross_mesh(), 27}}) {
    const auto C = assemble_qhat_constraints(mesh);
    const QhatLayout lay(mesh);
    CHECK(lay.n_free() == expected);
    // rank check: free dim = 9#T - rank(C)
    const Eigen::MatrixXd Cd(C);
    const int rank = int(Eigen::FullPivLU<Eigen::MatrixXd>(Cd).rank());
    CHECK(9 * mesh.num_triangles() - rank == expected);
    // every layout basis vector satisfies the constraints
    Eigen::MatrixXd N = Eigen::MatrixXd::Zero(9 * mesh.num_triangles(), lay.n_free());
    for (int t = 0; t < mesh.num_triangles(); ++t)
      for (int j = 0; j < 9; ++j)
        for (const auto& tm : lay.terms(t, j)) N(9 * t + j, tm.dof) += tm.w;
    CHECK((Cd * N).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(int(Eigen::FullPivLU<Eigen::MatrixXd>(N).rank()) == expected);
  }
}

TEST_CASE("dof counts") {
  const Mesh cc = make_crisscross_mesh();
  const DofCounts c = count_dofs(cc, SchemeKind::Theta);
  CHECK(c.uhat == 3);       // 3 #N0
  CHECK(c.qhat == 27);      // 2#E + 3#T - #N0
  CHECK(c.fields == 24);    // 6 #T
  const Mesh sq = make_unit_square_mesh();
  CHECK(count_dofs(sq, SchemeKind::Theta).uhat == 0);
  CHECK(count_dofs(sq, SchemeKind::Plain).fields == 8);
}

TEST_CASE("dimension formulas on random NVB meshes") {
  std::mt19937_64 gen(5);
  Mesh m = make_singular_domain_mesh();
  for (int it = 0; it < 5; ++it) {
    std::vector<int> marked;
    for (int t = 0; t < m.num_triangles(); ++t)
      if (gen() % 2 == 0) marked.push_back(t);
    if (marked.empty()) marked.push_back(0);
    m = m.refine(marked);
    const DofCounts c = count_dofs(m, SchemeKind::Theta);
    CHECK(c.uhat == 3 * m.num_interior_vertices());
    CHECK(c.qhat == 2 * m.num_edges() + 3 * m.num_triangles() - m.num_interior_vertices());
    CHECK(QhatLayout(m).n_free() == c.qhat);
  }
}

TEST_CASE("conformity: constrained qhat annihilates clamped C1 functions") {
  // z = (x(1-x)y(1-y))^2 * p vanishes with its gradient on the unit square
  // boundary and is globally smooth; every constrained qhat combination must
  // pair to zero against it (discrete counterpart of the trace
  // characterization of H^2_0)
  const EdgeRule er = edge_quadrature(23);
  Mesh mesh = make_crisscross_mesh();
  mesh = mesh.refine({0, 2}); // make it less symmetric
  const QhatLayout lay(mesh);
  const Poly bump = [] {
    const Poly x = Poly::monomial(1, 0), y = Poly::monomial(0, 1);
    const Poly one = Poly::constant(1.0);
    const Poly w = x * (one - x) * y * (one - y);
    return w * w;
  }();
  std::vector<Poly> tests;
  tests.push_back(bump);
  tests.push_back(bump * Poly::monomial(1, 0));
  tests.push_back(bump * Poly::monomial(0, 1));
  tests.push_back(bump * Poly::monomial(1, 1));
  for (int dof = 0; dof < lay.n_free(); ++dof) {
    for (const Poly& z : tests) {
      const VecPoly gz = grad(z);
      double acc = 0.0;
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        std::array<double, 9> c{};
        bool active = false;
        for (int j = 0; j < 9; ++j)
          for (const auto& tm : lay.terms(t, j))
            if (tm.dof == dof) {
              c[j] += tm.w;
              active = true;
            }
        if (!active) continue;
        acc += pair_qhat(
            mesh.geometry(t), c, [&](const Vec2& x) { return z(x); },
            [&](const Vec2& x) { return gz(x); }, er);
      }
      CHECK(std::abs(acc) < 1e-10);
    }
  }
}

TEST_SUITE_END();
