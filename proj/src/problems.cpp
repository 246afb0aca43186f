#include "platedpg/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "platedpg/quadrature.hpp"

namespace platedpg {

namespace {

double corner_det(double alpha, double omega) {
  const double A = (alpha + 1.0) * omega / 2.0;
  const double B = (alpha - 1.0) * omega / 2.0;
  return std::cos(A) * (alpha - 1.0) * std::sin(B) - std::cos(B) * (alpha + 1.0) * std::sin(A);
}

} // namespace

SingularParams solve_corner_exponent(double omega) {
  if (!(omega > M_PI - 1e-12 && omega < 2.0 * M_PI))
    throw std::invalid_argument("solve_corner_exponent: omega must be in [pi, 2 pi)");
  SingularParams p;
  p.omega = omega;
  if (std::abs(omega - M_PI) < 1e-12) {
    p.alpha = 1.0;
    p.C = 1.0;
    return p;
  }
  double lo = 1e-8, hi = 1.0 - 1e-10;
  double flo = corner_det(lo, omega);
  if (flo * corner_det(hi, omega) > 0.0)
    throw std::runtime_error("solve_corner_exponent: no sign change in (0,1)");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (flo * corner_det(mid, omega) <= 0.0)
      hi = mid;
    else {
      lo = mid;
      flo = corner_det(lo, omega);
    }
  }
  p.alpha = 0.5 * (lo + hi);
  const double A = (p.alpha + 1.0) * omega / 2.0;
  const double B = (p.alpha - 1.0) * omega / 2.0;
  p.C = -std::cos(A) / std::cos(B);
  return p;
}

ManufacturedSolution singular_solution(const SingularParams& p) {
  ManufacturedSolution s;
  s.name = "singular";
  s.corner_singular = true;
  s.corner = Vec2::Zero();
  const double al = p.alpha, C = p.C;
  auto polar = [](const Vec2& x) {
    return std::pair<double, double>(x.norm(), std::atan2(x.y(), x.x()));
  };
  s.u = [al, C, polar](const Vec2& x) {
    const auto [r, phi] = polar(x);
    if (r == 0.0) return 0.0;
    return std::pow(r, 1.0 + al) *
           (std::cos((al + 1.0) * phi) + C * std::cos((al - 1.0) * phi));
  };
  s.grad = [al, C, polar](const Vec2& x) {
    const auto [r, phi] = polar(x);
    if (r == 0.0) return Vec2::Zero().eval();
    const double ca = std::cos((al + 1.0) * phi), cb = std::cos((al - 1.0) * phi);
    const double sa = std::sin((al + 1.0) * phi), sb = std::sin((al - 1.0) * phi);
    const double ur = (1.0 + al) * std::pow(r, al) * (ca + C * cb);
    const double uphi_r = std::pow(r, al) * (-(al + 1.0) * sa - C * (al - 1.0) * sb);
    const Vec2 er(std::cos(phi), std::sin(phi));
    const Vec2 ephi(-std::sin(phi), std::cos(phi));
    return (ur * er + uphi_r * ephi).eval();
  };
  s.hess = [al, C, polar](const Vec2& x) {
    const auto [r, phi] = polar(x);
    if (r == 0.0) throw std::domain_error("singular solution Hessian at the corner");
    // u = r^(1+al) g(phi)
    const double g = std::cos((al + 1.0) * phi) + C * std::cos((al - 1.0) * phi);
    const double gp =
        -(al + 1.0) * std::sin((al + 1.0) * phi) - C * (al - 1.0) * std::sin((al - 1.0) * phi);
    const double gpp = -(al + 1.0) * (al + 1.0) * std::cos((al + 1.0) * phi) -
                       C * (al - 1.0) * (al - 1.0) * std::cos((al - 1.0) * phi);
    const double ra1 = std::pow(r, al - 1.0); // r^(al-1)
    const double u_rr = (1.0 + al) * al * ra1 * g;
    const double u_r_over_r = (1.0 + al) * ra1 * g;        // u_r / r
    const double u_rphi_over_r = (1.0 + al) * ra1 * gp;    // u_rphi / r
    const double u_phi_over_r2 = ra1 * gp;                 // u_phi / r^2
    const double u_phiphi_over_r2 = ra1 * gpp;             // u_phiphi / r^2
    const double t1 = u_rr;
    const double t2 = u_rphi_over_r - u_phi_over_r2;
    const double t3 = u_r_over_r + u_phiphi_over_r2;
    const double co = std::cos(phi), si = std::sin(phi);
    Vec3 h;
    h[0] = co * co * t1 - 2.0 * si * co * t2 + si * si * t3;
    h[1] = si * si * t1 + 2.0 * si * co * t2 + co * co * t3;
    h[2] = si * co * (t1 - t3) + (co * co - si * si) * t2;
    return h;
  };
  s.f = nullptr; // div Div C Hess u = 0 for this solution with C = I
  return s;
}

ManufacturedSolution smooth_solution() {
  ManufacturedSolution s;
  s.name = "smooth";
  auto X = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
  auto Xp = [](double t) { return 2.0 * t - 6.0 * t * t + 4.0 * t * t * t; };
  auto Xpp = [](double t) { return 2.0 - 12.0 * t + 12.0 * t * t; };
  s.u = [=](const Vec2& p) { return X(p.x()) * X(p.y()); };
  s.grad = [=](const Vec2& p) {
    return Vec2(Xp(p.x()) * X(p.y()), X(p.x()) * Xp(p.y()));
  };
  s.hess = [=](const Vec2& p) {
    return Vec3(Xpp(p.x()) * X(p.y()), X(p.x()) * Xpp(p.y()), Xp(p.x()) * Xp(p.y()));
  };
  // f = Lap^2 u = u_xxxx + 2 u_xxyy + u_yyyy  (X'''' = 24)
  s.f = [=](const Vec2& p) {
    return 24.0 * X(p.y()) + 2.0 * Xpp(p.x()) * Xpp(p.y()) + 24.0 * X(p.x());
  };
  return s;
}

Mesh make_singular_domain_mesh() {
  const double c = 1.0 - std::sqrt(2.0); // wedge edges leave the square at y = +-1
  std::vector<Vec2> v = {Vec2(0, 0), Vec2(c, -1), Vec2(1, -1), Vec2(1, 1), Vec2(c, 1)};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
  return Mesh::from_seed(std::move(v), std::move(t));
}

Mesh make_unit_square_mesh() {
  std::vector<Vec2> v = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
  return Mesh::from_seed(std::move(v), std::move(t));
}

Mesh make_crisscross_mesh() {
  std::vector<Vec2> v = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1), Vec2(0.5, 0.5)};
  std::vector<std::array<int, 3>> t = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return Mesh::from_seed(std::move(v), std::move(t));
}

namespace {

struct ErrAcc {
  double u2 = 0.0, th2 = 0.0, M2 = 0.0;
};

void accumulate_on_triangle(const TriGeom& g, const QuadratureRule& rule, double uT,
                            const Vec2& thT, const Vec3& MT, bool with_theta,
                            const ManufacturedSolution& exact, const Mat3& C, ErrAcc& acc) {
  const AffineMap m = g.map();
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2 x = m.F(rule.point(q));
    const double w = m.J * rule.weights[q];
    const double du = uT - exact.u(x);
    acc.u2 += w * du * du;
    if (with_theta) {
      const Vec2 dth = thT - exact.grad(x);
      acc.th2 += w * dth.squaredNorm();
    }
    const Vec3 Me = -(C * exact.hess(x));
    const Vec3 dM = MT - Me;
    acc.M2 += w * voigt_dot(dM, dM);
  }
}

bool touches_corner(const TriGeom& g, const Vec2& corner) {
  for (const Vec2& p : g.p)
    if ((p - corner).norm() < 1e-13) return true;
  return false;
}

// splits the triangle at edge midpoints; recurses on the child containing
// the corner vertex, integrating the three far children at each level
void corner_subdivided(const TriGeom& g, const Vec2& corner, int levels,
                       const QuadratureRule& rule, double uT, const Vec2& thT, const Vec3& MT,
                       bool with_theta, const ManufacturedSolution& exact, const Mat3& C,
                       ErrAcc& acc) {
  if (levels == 0) {
    accumulate_on_triangle(g, rule, uT, thT, MT, with_theta, exact, C, acc);
    return;
  }
  int ic = 0;
  for (int i = 1; i < 3; ++i)
    if ((g.p[i] - corner).norm() < (g.p[ic] - corner).norm()) ic = i;
  const Vec2 a = g.p[ic], b = g.p[(ic + 1) % 3], cpt = g.p[(ic + 2) % 3];
  const Vec2 mab = 0.5 * (a + b), mbc = 0.5 * (b + cpt), mca = 0.5 * (cpt + a);
  const TriGeom far1{{mab, b, mbc}}, far2{{mbc, cpt, mca}}, far3{{mab, mbc, mca}};
  accumulate_on_triangle(far1, rule, uT, thT, MT, with_theta, exact, C, acc);
  accumulate_on_triangle(far2, rule, uT, thT, MT, with_theta, exact, C, acc);
  accumulate_on_triangle(far3, rule, uT, thT, MT, with_theta, exact, C, acc);
  corner_subdivided(TriGeom{{a, mab, mca}}, corner, levels - 1, rule, uT, thT, MT, with_theta,
                    exact, C, acc);
}

} // namespace

FieldErrors measure_errors(const DpgSystem& sys, const Eigen::VectorXd& x,
                           const ManufacturedSolution& exact) {
  const Mesh& mesh = sys.mesh();
  const bool with_theta = (sys.scheme().kind == SchemeKind::Theta);
  const Mat3 C = sys.scheme().material.C;
  const QuadratureRule rule = triangle_quadrature(10);
  ErrAcc acc;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriGeom g = mesh.geometry(t);
    const double uT = sys.u(t, x);
    const Vec2 thT = sys.theta(t, x);
    const Vec3 MT = sys.M_voigt(t, x);
    if (exact.corner_singular && touches_corner(g, exact.corner))
      corner_subdivided(g, exact.corner, 4, rule, uT, thT, MT, with_theta, exact, C, acc);
    else
      accumulate_on_triangle(g, rule, uT, thT, MT, with_theta, exact, C, acc);
  }
  FieldErrors e;
  e.u = std::sqrt(acc.u2);
  e.theta = std::sqrt(acc.th2);
  e.M = std::sqrt(acc.M2);
  return e;
}

} // namespace platedpg
