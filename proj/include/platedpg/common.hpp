#ifndef PLATEDPG_COMMON_HPP
#define PLATEDPG_COMMON_HPP

#include <Eigen/Dense>

namespace platedpg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Schemes: Theta carries the deflection gradient as an independent field
/// (test space P3 x P4s x P3), Plain is the gradient-free formulation
/// (test space P3 x P4s).
enum class SchemeKind { Theta, Plain };

/// Inner product of symmetric tensors in Voigt form (xx, yy, xy):
/// sigma : tau = s_xx t_xx + s_yy t_yy + 2 s_xy t_xy.
inline double voigt_dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + 2.0 * a[2] * b[2];
}

} // namespace platedpg

#endif
