#ifndef PLATEDPG_PROBLEMS_HPP
#define PLATEDPG_PROBLEMS_HPP

#include <string>

#include "platedpg/dpg_core.hpp"
#include "platedpg/mesh.hpp"

namespace platedpg {

/// Clamped-corner singularity parameters: u(r,phi) = r^(1+alpha) *
/// (cos((alpha+1)phi) + C cos((alpha-1)phi)) with phi measured from the
/// bisector of the domain wedge, so u and its normal derivative vanish on
/// the clamped edges phi = +-omega/2.
struct SingularParams {
  double omega = 0.0;
  double alpha = 0.0;
  double C = 0.0;
};

/// Root of the clamped-corner determinant equation in (0,1], bisection to
/// 1e-12. omega = pi returns alpha = 1 (straight boundary, no singularity).
SingularParams solve_corner_exponent(double omega);

/// Manufactured solution bundle; hess is Voigt (u_xx, u_yy, u_xy).
/// M = -C hess, f = -div Div M.
struct ManufacturedSolution {
  std::function<double(const Vec2&)> u;
  std::function<Vec2(const Vec2&)> grad;
  std::function<Vec3(const Vec2&)> hess;
  std::function<double(const Vec2&)> f; ///< null means f == 0
  bool corner_singular = false;
  Vec2 corner = Vec2::Zero();
  std::string name;

  ProblemFns problem_fns() const {
    return ProblemFns{f, u, grad, hess};
  }
};

/// Singular corner solution on the wedge domain; throws at the corner point.
ManufacturedSolution singular_solution(const SingularParams& p);

/// u = x^2(1-x)^2 y^2(1-y)^2 on the unit square (clamped), f = Lap^2 u.
ManufacturedSolution smooth_solution();

/// Square (-1,1)^2 minus the wedge {|phi - pi| <= 3 pi/8}; the reentrant
/// corner at the origin has domain-side opening 5 pi/4. Three-triangle fan.
Mesh make_singular_domain_mesh();
/// Unit square from two triangles (diagonal (0,0)-(1,1)).
Mesh make_unit_square_mesh();
/// Unit square as four triangles meeting at the center.
Mesh make_crisscross_mesh();

struct FieldErrors {
  double u = 0.0;
  double theta = 0.0; ///< 0 for the plain scheme
  double M = 0.0;
};

/// Elementwise L2 errors of the piecewise-constant fields against the exact
/// solution; elements touching a singular corner are integrated with 4-level
/// geometric subdivision toward the corner.
FieldErrors measure_errors(const DpgSystem& sys, const Eigen::VectorXd& x,
                           const ManufacturedSolution& exact);

} // namespace platedpg

#endif
