#ifndef PLATEDPG_QUADRATURE_HPP
#define PLATEDPG_QUADRATURE_HPP

#include "platedpg/common.hpp"

namespace platedpg {

/// Quadrature on the reference triangle conv{(0,0),(1,0),(0,1)}.
/// Positive weights, weights sum to the reference area 1/2.
struct QuadratureRule {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points; ///< reference coordinates
  Eigen::VectorXd weights;
  int exactness = 0;

  int size() const { return int(weights.size()); }
  Vec2 point(int q) const { return points.row(q).transpose(); }
  /// Barycentric coordinates (l0, l1, l2) of node q.
  Vec3 barycentric(int q) const {
    const double x = points(q, 0), y = points(q, 1);
    return Vec3(1.0 - x - y, x, y);
  }
};

/// Quadrature on the unit interval [0,1] (Gauss-Legendre); weights sum to 1.
struct EdgeRule {
  Eigen::VectorXd s;
  Eigen::VectorXd w;
  int exactness = 0;
  int size() const { return int(w.size()); }
};

/// Collapsed-coordinate tensor Gauss rule, exact for total degree <= d, d <= 12.
/// Throws std::invalid_argument for unsupported degrees.
QuadratureRule triangle_quadrature(int d);

/// Gauss-Legendre rule on [0,1], exact for degree <= d, d <= 25.
EdgeRule edge_quadrature(int d);

} // namespace platedpg

#endif
