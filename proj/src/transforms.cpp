#include "platedpg/transforms.hpp"

#include <stdexcept>

namespace platedpg {

namespace {
void require_orientation(const AffineMap& m) {
  if (!(m.J > 0.0)) throw std::invalid_argument("transform: map must have J > 0");
}
} // namespace

Poly push_scalar(const AffineMap& m, const Poly& zhat) {
  require_orientation(m);
  return zhat.compose_affine(m.Binv, -m.Binv * m.a);
}

VecPoly push_vector(const AffineMap& m, const VecPoly& tauhat) {
  require_orientation(m);
  const Poly tx = push_scalar(m, tauhat.x), ty = push_scalar(m, tauhat.y);
  const Mat2 S = m.B / m.J;
  return {tx * S(0, 0) + ty * S(0, 1), tx * S(1, 0) + ty * S(1, 1)};
}

SymPoly push_tensor(const AffineMap& m, const SymPoly& Mhat) {
  require_orientation(m);
  const Poly xx = push_scalar(m, Mhat.xx), yy = push_scalar(m, Mhat.yy),
             xy = push_scalar(m, Mhat.xy);
  const Mat2& B = m.B;
  // (B Mhat B^t)/J, expanded on symmetric components
  SymPoly out;
  out.xx = (xx * (B(0, 0) * B(0, 0)) + yy * (B(0, 1) * B(0, 1)) +
            xy * (2.0 * B(0, 0) * B(0, 1))) * (1.0 / m.J);
  out.yy = (xx * (B(1, 0) * B(1, 0)) + yy * (B(1, 1) * B(1, 1)) +
            xy * (2.0 * B(1, 0) * B(1, 1))) * (1.0 / m.J);
  out.xy = (xx * (B(0, 0) * B(1, 0)) + yy * (B(0, 1) * B(1, 1)) +
            xy * (B(0, 0) * B(1, 1) + B(0, 1) * B(1, 0))) * (1.0 / m.J);
  return out;
}

namespace {
AffineMap inverse_map(const AffineMap& m) {
  require_orientation(m);
  AffineMap inv;
  inv.B = m.Binv;
  inv.a = -m.Binv * m.a;
  inv.J = 1.0 / m.J;
  inv.Binv = m.B;
  inv.h = m.h;
  return inv;
}
} // namespace

Poly pull_scalar(const AffineMap& m, const Poly& z) { return push_scalar(inverse_map(m), z); }

VecPoly pull_vector(const AffineMap& m, const VecPoly& tau) {
  return push_vector(inverse_map(m), tau);
}

SymPoly pull_tensor(const AffineMap& m, const SymPoly& M) {
  return push_tensor(inverse_map(m), M);
}

namespace {
double coeff_residual(const Poly& a, const Poly& b) {
  return (a - b).max_abs_coeff();
}
} // namespace

DivDivIdentityResiduals verify_divdiv_identity(const AffineMap& m, const SymPoly& Mhat,
                                               const Poly& zhat) {
  DivDivIdentityResiduals r;
  const SymPoly M = push_tensor(m, Mhat);
  const Poly z = push_scalar(m, zhat);
  const double scale = 1.0 + Mhat.xx.max_abs_coeff() + Mhat.yy.max_abs_coeff() +
                       Mhat.xy.max_abs_coeff() + zhat.max_abs_coeff();

  // |J| (div Div M) o F = divhat Divhat Mhat
  const Poly lhs1 = M.divdiv().compose_affine(m.B, m.a) * m.J;
  r.divdiv = coeff_residual(lhs1, Mhat.divdiv()) / scale;

  // |J| (Hess z : M) o F = Hesshat zhat : Mhat
  const SymPoly Hz = hess(z), Hzh = hess(zhat);
  const Poly pair_phys = Hz.xx * M.xx + Hz.yy * M.yy + Hz.xy * M.xy * 2.0;
  const Poly pair_ref = Hzh.xx * Mhat.xx + Hzh.yy * Mhat.yy + Hzh.xy * Mhat.xy * 2.0;
  r.hess_pairing = coeff_residual(pair_phys.compose_affine(m.B, m.a) * m.J, pair_ref) / scale;

  // trace pairing via the volume form on both sides
  const double lhs = m.J * ((M.divdiv() * z).compose_affine(m.B, m.a).integral_ref() -
                            pair_phys.compose_affine(m.B, m.a).integral_ref());
  const double rhs = (Mhat.divdiv() * zhat).integral_ref() - pair_ref.integral_ref();
  r.trace_pairing = std::abs(lhs - rhs) / scale;
  return r;
}

DivDivVectorIdentityResiduals verify_divdiv_vector_identity(const AffineMap& m,
                                                            const SymPoly& Xihat,
                                                            const VecPoly& tauhat,
                                                            const Poly& uhat) {
  DivDivVectorIdentityResiduals r;
  const SymPoly Xi = push_tensor(m, Xihat);
  const VecPoly tau = push_vector(m, tauhat);
  const Poly u = push_scalar(m, uhat);
  const double scale = 1.0 + Xihat.xx.max_abs_coeff() + Xihat.yy.max_abs_coeff() +
                       Xihat.xy.max_abs_coeff() + tauhat.x.max_abs_coeff() +
                       tauhat.y.max_abs_coeff() + uhat.max_abs_coeff();

  // |J| (Div Xi - tau) o F = B (Divhat Xihat - tauhat)
  const VecPoly mis = Xi.Div() - tau;
  const VecPoly mis_ref = Xihat.Div() - tauhat;
  const Poly lx = mis.x.compose_affine(m.B, m.a) * m.J -
                  (mis_ref.x * m.B(0, 0) + mis_ref.y * m.B(0, 1));
  const Poly ly = mis.y.compose_affine(m.B, m.a) * m.J -
                  (mis_ref.x * m.B(1, 0) + mis_ref.y * m.B(1, 1));
  r.div_mismatch = std::max(lx.max_abs_coeff(), ly.max_abs_coeff()) / scale;

  // |J| (div tau) o F = divhat tauhat
  r.div_tau = coeff_residual(tau.div().compose_affine(m.B, m.a) * m.J, tauhat.div()) / scale;

  // <trt u, (Xi,tau)> = (u, div tau) + (grad u, tau - Div Xi) - (Hess u : Xi),
  // evaluated on both elements
  const VecPoly gu = grad(u), guh = grad(uhat);
  const SymPoly Hu = hess(u), Huh = hess(uhat);
  auto vol = [](const Poly& p) { return p.integral_ref(); };
  const Poly phys = u * tau.div() + gu.x * (tau.x - Xi.Div().x) + gu.y * (tau.y - Xi.Div().y) -
                    (Hu.xx * Xi.xx + Hu.yy * Xi.yy + Hu.xy * Xi.xy * 2.0);
  const Poly ref = uhat * tauhat.div() + guh.x * mis_ref.x * (-1.0) + guh.y * mis_ref.y * (-1.0) -
                   (Huh.xx * Xihat.xx + Huh.yy * Xihat.yy + Huh.xy * Xihat.xy * 2.0);
  const double lhs = m.J * vol(phys.compose_affine(m.B, m.a));
  const double rhs = vol(ref);
  r.trace_pairing = std::abs(lhs - rhs) / scale;
  return r;
}

} // namespace platedpg
