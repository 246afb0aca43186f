#include "platedpg/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace platedpg {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

} // namespace

EdgeRule edge_quadrature(int d) {
  if (d < 0 || d > 25) throw std::invalid_argument("edge_quadrature: unsupported degree");
  const int n = d / 2 + 1; // exact for degree 2n-1 >= d
  Eigen::VectorXd x, w;
  gauss_legendre(n, x, w);
  EdgeRule r;
  r.s = (0.5 * (x.array() + 1.0)).matrix();
  r.w = 0.5 * w;
  r.exactness = 2 * n - 1;
  return r;
}

QuadratureRule triangle_quadrature(int d) {
  if (d < 0 || d > 12) throw std::invalid_argument("triangle_quadrature: unsupported degree");
  // map (u,v) in [0,1]^2 to (x,y) = (u, v(1-u)), Jacobian (1-u).
  // Integrand of total degree d becomes degree <= d+1 in u, <= d in v.
  const int m = (d + 3) / 2; // 2m-1 >= d+1
  Eigen::VectorXd x, w;
  gauss_legendre(m, x, w);
  QuadratureRule r;
  r.points.resize(m * m, 2);
  r.weights.resize(m * m);
  int k = 0;
  for (int i = 0; i < m; ++i) {
    const double u = 0.5 * (x[i] + 1.0), wu = 0.5 * w[i];
    for (int j = 0; j < m; ++j, ++k) {
      const double v = 0.5 * (x[j] + 1.0), wv = 0.5 * w[j];
      r.points(k, 0) = u;
      r.points(k, 1) = v * (1.0 - u);
      r.weights[k] = wu * wv * (1.0 - u);
    }
  }
  r.exactness = d;
  return r;
}

} // namespace platedpg
