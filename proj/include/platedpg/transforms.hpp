#ifndef PLATEDPG_TRANSFORMS_HPP
#define PLATEDPG_TRANSFORMS_HPP

#include "platedpg/mesh.hpp"
#include "platedpg/poly.hpp"

namespace platedpg {

enum class TransformKind { Pullback, Piola, PiolaKirchhoff };

/// zhat on the reference element -> z = zhat o F^{-1} on T.
Poly push_scalar(const AffineMap& m, const Poly& zhat);
/// Piola: |J| tau o F = B tauhat.
VecPoly push_vector(const AffineMap& m, const VecPoly& tauhat);
/// Piola-Kirchhoff: |J| M o F = B Mhat B^t (symmetry-preserving).
SymPoly push_tensor(const AffineMap& m, const SymPoly& Mhat);

Poly pull_scalar(const AffineMap& m, const Poly& z);
VecPoly pull_vector(const AffineMap& m, const VecPoly& tau);
SymPoly pull_tensor(const AffineMap& m, const SymPoly& M);

/// Residuals of the Piola-Kirchhoff transformation identities for
/// M = push_tensor(Mhat), z = push_scalar(zhat):
///   |J| (div Div M) o F   = divhat Divhat Mhat        (max coeff residual)
///   |J| (Hess z : M) o F  = Hesshat zhat : Mhat
///   <tr M, z>_dT          = <tr Mhat, zhat>_dThat     (volume-form evaluation)
struct DivDivIdentityResiduals {
  double divdiv = 0.0;
  double hess_pairing = 0.0;
  double trace_pairing = 0.0;
  double max() const { return std::max(divdiv, std::max(hess_pairing, trace_pairing)); }
};
DivDivIdentityResiduals verify_divdiv_identity(const AffineMap& m, const SymPoly& Mhat,
                                               const Poly& zhat);

/// Same for the combined (Piola-Kirchhoff, Piola) transform of (Xi, tau):
///   |J| (Div Xi - tau) o F = B (Divhat Xihat - tauhat)
///   |J| (div tau) o F      = divhat tauhat
///   <trt u, (Xi,tau)>_dT   = <trt uhat, (Xihat,tauhat)>_dThat
struct DivDivVectorIdentityResiduals {
  double div_mismatch = 0.0;
  double div_tau = 0.0;
  double trace_pairing = 0.0;
  double max() const { return std::max(div_mismatch, std::max(div_tau, trace_pairing)); }
};
DivDivVectorIdentityResiduals verify_divdiv_vector_identity(const AffineMap& m,
                                                            const SymPoly& Xihat,
                                                            const VecPoly& tauhat,
                                                            const Poly& uhat);

} // namespace platedpg

#endif
