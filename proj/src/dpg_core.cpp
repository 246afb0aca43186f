#include "platedpg/dpg_core.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace platedpg {

bool MaterialTensor::is_valid(double tol) const {
  const Mat3 W = Vec3(1.0, 1.0, 2.0).asDiagonal();
  if (((W * C) - (C.transpose() * W)).cwiseAbs().maxCoeff() > tol) return false;
  // positive definite w.r.t. the weighted inner product
  const Mat3 S = W * C;
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (S + S.transpose()));
  return es.eigenvalues().minCoeff() > tol;
}

namespace {

// Voigt congruence: voigt(A H A^T) = K(A) voigt(H)
Mat3 voigt_congruence(const Mat2& A) {
  Mat3 K;
  K << A(0, 0) * A(0, 0), A(0, 1) * A(0, 1), 2.0 * A(0, 0) * A(0, 1),
       A(1, 0) * A(1, 0), A(1, 1) * A(1, 1), 2.0 * A(1, 0) * A(1, 1),
       A(0, 0) * A(1, 0), A(0, 1) * A(1, 1), A(0, 0) * A(1, 1) + A(0, 1) * A(1, 0);
  return K;
}

constexpr int kVolumeExactness = 10;
constexpr int kEdgeExactness = 11;

} // namespace

struct ElementKernel::Tables {
  QuadratureRule vq;
  EdgeRule er;
  int nz = 0, nxi = 0, ntau = 0;

  // scalar test basis at volume points
  Eigen::MatrixXd Zv, Zhxx, Zhyy, Zhxy;
  // tensor basis at volume points (reference Voigt components and derived)
  Eigen::MatrixXd Xxx, Xyy, Xxy, XDx, XDy, Xdd;
  // vector basis at volume points
  Eigen::MatrixXd Tx, Ty, Tdiv;

  // per reference edge (3): values at edge nodes
  std::array<Eigen::MatrixXd, 3> eZ, eZgx, eZgy;
  std::array<Eigen::MatrixXd, 3> eXxx, eXyy, eXxy, eXDx, eXDy;
  std::array<Eigen::MatrixXd, 3> eTx, eTy;

  // qhat functional tables for the scalar basis
  Eigen::MatrixXd z_vertex;             // 3 x nz
  Eigen::MatrixXd z_edge_mean;          // 3 x nz
  Eigen::MatrixXd z_edge_gx, z_edge_gy; // 3 x nz, integrated ref gradient
};

ElementKernel::ElementKernel(const SchemeConfig& scheme) : scheme_(scheme) {
  auto tab = std::make_shared<Tables>();
  tab->vq = triangle_quadrature(kVolumeExactness);
  tab->er = edge_quadrature(kEdgeExactness);
  const int nq = tab->vq.size(), ne = tab->er.size();

  const ScalarBasis zb(3);
  const int xdeg = (scheme.kind == SchemeKind::Plain) ? scheme.plain_tensor_degree : 4;
  const SymTensorBasis xb(xdeg);
  tab->nz = zb.size();
  tab->nxi = xb.size();
  tab->ntau = (scheme.kind == SchemeKind::Theta) ? 2 * Poly::dim(3) : 0;

  tab->Zv.resize(nq, tab->nz);
  tab->Zhxx.resize(nq, tab->nz);
  tab->Zhyy.resize(nq, tab->nz);
  tab->Zhxy.resize(nq, tab->nz);
  for (int i = 0; i < tab->nz; ++i) {
    const Poly& z = zb[i];
    const SymPoly h = hess(z);
    for (int q = 0; q < nq; ++q) {
      const Vec2 x = tab->vq.point(q);
      tab->Zv(q, i) = z(x);
      tab->Zhxx(q, i) = h.xx(x);
      tab->Zhyy(q, i) = h.yy(x);
      tab->Zhxy(q, i) = h.xy(x);
    }
  }
  tab->Xxx.resize(nq, tab->nxi);
  tab->Xyy.resize(nq, tab->nxi);
  tab->Xxy.resize(nq, tab->nxi);
  tab->XDx.resize(nq, tab->nxi);
  tab->XDy.resize(nq, tab->nxi);
  tab->Xdd.resize(nq, tab->nxi);
  for (int i = 0; i < tab->nxi; ++i) {
    const SymPoly& s = xb[i];
    const VecPoly D = s.Div();
    const Poly dd = s.divdiv();
    for (int q = 0; q < nq; ++q) {
      const Vec2 x = tab->vq.point(q);
      tab->Xxx(q, i) = s.xx(x);
      tab->Xyy(q, i) = s.yy(x);
      tab->Xxy(q, i) = s.xy(x);
      tab->XDx(q, i) = D.x(x);
      tab->XDy(q, i) = D.y(x);
      tab->Xdd(q, i) = dd(x);
    }
  }
  std::vector<VecPoly> taub;
  if (scheme.kind == SchemeKind::Theta) {
    const VectorBasis vb(3);
    for (int i = 0; i < vb.size(); ++i) taub.push_back(vb[i]);
    tab->Tx.resize(nq, tab->ntau);
    tab->Ty.resize(nq, tab->ntau);
    tab->Tdiv.resize(nq, tab->ntau);
    for (int i = 0; i < tab->ntau; ++i) {
      const Poly d = taub[i].div();
      for (int q = 0; q < nq; ++q) {
        const Vec2 x = tab->vq.point(q);
        tab->Tx(q, i) = taub[i].x(x);
        tab->Ty(q, i) = taub[i].y(x);
        tab->Tdiv(q, i) = d(x);
      }
    }
  }

  const TriGeom ref{{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}};
  tab->z_vertex.resize(3, tab->nz);
  tab->z_edge_mean = Eigen::MatrixXd::Zero(3, tab->nz);
  tab->z_edge_gx = Eigen::MatrixXd::Zero(3, tab->nz);
  tab->z_edge_gy = Eigen::MatrixXd::Zero(3, tab->nz);
  for (int k = 0; k < 3; ++k) {
    const EdgeFrame f = ref.frame(k);
    tab->eZ[k].resize(ne, tab->nz);
    tab->eZgx[k].resize(ne, tab->nz);
    tab->eZgy[k].resize(ne, tab->nz);
    tab->eXxx[k].resize(ne, tab->nxi);
    tab->eXyy[k].resize(ne, tab->nxi);
    tab->eXxy[k].resize(ne, tab->nxi);
    tab->eXDx[k].resize(ne, tab->nxi);
    tab->eXDy[k].resize(ne, tab->nxi);
    if (scheme.kind == SchemeKind::Theta) {
      tab->eTx[k].resize(ne, tab->ntau);
      tab->eTy[k].resize(ne, tab->ntau);
    }
    for (int i = 0; i < tab->nz; ++i) {
      const Poly& z = zb[i];
      const VecPoly g = grad(z);
      tab->z_vertex(k, i) = z(ref.p[k]);
      for (int q = 0; q < ne; ++q) {
        const Vec2 x = f.at(tab->er.s[q]);
        tab->eZ[k](q, i) = z(x);
        tab->eZgx[k](q, i) = g.x(x);
        tab->eZgy[k](q, i) = g.y(x);
        tab->z_edge_mean(k, i) += tab->er.w[q] * z(x);
        tab->z_edge_gx(k, i) += tab->er.w[q] * g.x(x);
        tab->z_edge_gy(k, i) += tab->er.w[q] * g.y(x);
      }
    }
    for (int i = 0; i < tab->nxi; ++i) {
      const SymPoly& s = xb[i];
      const VecPoly D = s.Div();
      for (int q = 0; q < ne; ++q) {
        const Vec2 x = f.at(tab->er.s[q]);
        tab->eXxx[k](q, i) = s.xx(x);
        tab->eXyy[k](q, i) = s.yy(x);
        tab->eXxy[k](q, i) = s.xy(x);
        tab->eXDx[k](q, i) = D.x(x);
        tab->eXDy[k](q, i) = D.y(x);
      }
    }
    if (scheme.kind == SchemeKind::Theta) {
      for (int i = 0; i < tab->ntau; ++i) {
        for (int q = 0; q < ne; ++q) {
          const Vec2 x = f.at(tab->er.s[q]);
          tab->eTx[k](q, i) = taub[i].x(x);
          tab->eTy[k](q, i) = taub[i].y(x);
        }
      }
    }
  }
  tab_ = tab;
  n_test_ = tab->nz + tab->nxi + tab->ntau;
  n_trial_ = n_field_cols() + 18;
}

namespace {

/// Per-element transformed test tables.
struct PhysTables {
  Eigen::MatrixXd Pxx, Pyy, Pxy;      // physical hessians of z tests (volume)
  Eigen::MatrixXd Sxx, Syy, Sxy;      // physical tensor components (volume)
  Eigen::MatrixXd Rx, Ry;             // Div Xi - tau (volume, mixed block)
  Eigen::MatrixXd Dv;                 // div tau (theta) / unused
  Eigen::MatrixXd Dd;                 // divdiv Theta (plain)
  Eigen::VectorXd wj;                 // |J| * volume weights
};

PhysTables transform_volume(const ElementKernel::Tables& tb, const AffineMap& m,
                            SchemeKind kind) {
  PhysTables p;
  const double invJ = 1.0 / m.J;
  const Mat3 Kh = voigt_congruence(m.Binv.transpose()); // hess: B^{-T} H B^{-1}
  p.Pxx = Kh(0, 0) * tb.Zhxx + Kh(0, 1) * tb.Zhyy + Kh(0, 2) * tb.Zhxy;
  p.Pyy = Kh(1, 0) * tb.Zhxx + Kh(1, 1) * tb.Zhyy + Kh(1, 2) * tb.Zhxy;
  p.Pxy = Kh(2, 0) * tb.Zhxx + Kh(2, 1) * tb.Zhyy + Kh(2, 2) * tb.Zhxy;
  const Mat3 Kt = invJ * voigt_congruence(m.B); // Piola-Kirchhoff push
  const int nmix = (kind == SchemeKind::Theta) ? tb.nxi + tb.ntau : tb.nxi;
  const int nq = tb.vq.size();
  p.Sxx = Eigen::MatrixXd::Zero(nq, nmix);
  p.Syy = Eigen::MatrixXd::Zero(nq, nmix);
  p.Sxy = Eigen::MatrixXd::Zero(nq, nmix);
  p.Sxx.leftCols(tb.nxi) = Kt(0, 0) * tb.Xxx + Kt(0, 1) * tb.Xyy + Kt(0, 2) * tb.Xxy;
  p.Syy.leftCols(tb.nxi) = Kt(1, 0) * tb.Xxx + Kt(1, 1) * tb.Xyy + Kt(1, 2) * tb.Xxy;
  p.Sxy.leftCols(tb.nxi) = Kt(2, 0) * tb.Xxx + Kt(2, 1) * tb.Xyy + Kt(2, 2) * tb.Xxy;
  if (kind == SchemeKind::Theta) {
    // R = Div Xi - tau ; Piola pushes both Div Xi and tau
    p.Rx = Eigen::MatrixXd::Zero(nq, nmix);
    p.Ry = Eigen::MatrixXd::Zero(nq, nmix);
    p.Rx.leftCols(tb.nxi) = invJ * (m.B(0, 0) * tb.XDx + m.B(0, 1) * tb.XDy);
    p.Ry.leftCols(tb.nxi) = invJ * (m.B(1, 0) * tb.XDx + m.B(1, 1) * tb.XDy);
    p.Rx.rightCols(tb.ntau) = -invJ * (m.B(0, 0) * tb.Tx + m.B(0, 1) * tb.Ty);
    p.Ry.rightCols(tb.ntau) = -invJ * (m.B(1, 0) * tb.Tx + m.B(1, 1) * tb.Ty);
    p.Dv = Eigen::MatrixXd::Zero(nq, nmix);
    p.Dv.rightCols(tb.ntau) = invJ * tb.Tdiv;
  } else {
    p.Dd = invJ * tb.Xdd;
  }
  p.wj = m.J * tb.vq.weights;
  return p;
}

} // namespace

Eigen::MatrixXd ElementKernel::local_gram(const TriGeom& g) const {
  const Tables& tb = *tab_;
  const AffineMap m = g.map();
  const PhysTables p = transform_volume(tb, m, scheme_.kind);
  const auto W = p.wj.asDiagonal();
  const int nz = tb.nz;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n_test_, n_test_);
  G.topLeftCorner(nz, nz) = tb.Zv.transpose() * W * tb.Zv +
                            p.Pxx.transpose() * W * p.Pxx +
                            p.Pyy.transpose() * W * p.Pyy +
                            2.0 * p.Pxy.transpose() * W * p.Pxy;
  const int nmix = n_test_ - nz;
  Eigen::MatrixXd Gm = p.Sxx.transpose() * W * p.Sxx + p.Syy.transpose() * W * p.Syy +
                       2.0 * p.Sxy.transpose() * W * p.Sxy;
  if (scheme_.kind == SchemeKind::Theta) {
    Gm += p.Rx.transpose() * W * p.Rx + p.Ry.transpose() * W * p.Ry +
          p.Dv.transpose() * W * p.Dv;
  } else {
    Gm += p.Dd.transpose() * W * p.Dd;
  }
  G.bottomRightCorner(nmix, nmix) = Gm;
  return 0.5 * (G + G.transpose());
}

Eigen::MatrixXd ElementKernel::local_b(const TriGeom& g) const {
  const Tables& tb = *tab_;
  const AffineMap m = g.map();
  const PhysTables p = transform_volume(tb, m, scheme_.kind);
  const Eigen::VectorXd w1 = p.wj;
  const int nz = tb.nz, nxi = tb.nxi;
  const bool theta = (scheme_.kind == SchemeKind::Theta);
  const int nmix = n_test_ - nz;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n_test_, n_trial_);
  const Mat3 Cinv = scheme_.material.inverse();
  int c = 0;
  // u : (u, div tau) or (u, divdiv Theta)
  if (theta)
    B.col(c).tail(nmix) = p.Dv.transpose() * w1;
  else
    B.col(c).tail(nmix) = p.Dd.transpose() * w1;
  ++c;
  if (theta) {
    // theta : (th, tau - Div Xi) = -(th, R)
    B.col(c).tail(nmix) = -(p.Rx.transpose() * w1);
    ++c;
    B.col(c).tail(nmix) = -(p.Ry.transpose() * w1);
    ++c;
  }
  // M (Voigt units): (E_c, Cinv Xi + Hess z) with weighted product
  {
    Eigen::MatrixXd CSxx = Cinv(0, 0) * p.Sxx + Cinv(0, 1) * p.Syy + Cinv(0, 2) * p.Sxy;
    Eigen::MatrixXd CSyy = Cinv(1, 0) * p.Sxx + Cinv(1, 1) * p.Syy + Cinv(1, 2) * p.Sxy;
    Eigen::MatrixXd CSxy = Cinv(2, 0) * p.Sxx + Cinv(2, 1) * p.Syy + Cinv(2, 2) * p.Sxy;
    B.col(c).head(nz) = p.Pxx.transpose() * w1;
    B.col(c).tail(nmix) = CSxx.transpose() * w1;
    ++c;
    B.col(c).head(nz) = p.Pyy.transpose() * w1;
    B.col(c).tail(nmix) = CSyy.transpose() * w1;
    ++c;
    B.col(c).head(nz) = 2.0 * (p.Pxy.transpose() * w1);
    B.col(c).tail(nmix) = 2.0 * (CSxy.transpose() * w1);
    ++c;
  }
  const int uhat0 = c;
  // uhat columns: -<uhat, (Xi,tau)> resp. -<uhat, Theta>
  const double invJ = 1.0 / m.J;
  const Mat3 Kt = invJ * voigt_congruence(m.B);
  for (int k = 0; k < 3; ++k) {
    const EdgeFrame f = g.frame(k);
    const int ia = k, ib = (k + 1) % 3;
    // physical tensor components at edge nodes
    Eigen::MatrixXd exx = Kt(0, 0) * tb.eXxx[k] + Kt(0, 1) * tb.eXyy[k] + Kt(0, 2) * tb.eXxy[k];
    Eigen::MatrixXd eyy = Kt(1, 0) * tb.eXxx[k] + Kt(1, 1) * tb.eXyy[k] + Kt(1, 2) * tb.eXxy[k];
    Eigen::MatrixXd exy = Kt(2, 0) * tb.eXxx[k] + Kt(2, 1) * tb.eXyy[k] + Kt(2, 2) * tb.eXxy[k];
    // n.tau (theta) or n.Div Theta (plain) at edge nodes, per mixed test fn
    Eigen::MatrixXd ntau = Eigen::MatrixXd::Zero(tb.er.size(), nmix);
    if (theta) {
      const Eigen::MatrixXd tx = invJ * (m.B(0, 0) * tb.eTx[k] + m.B(0, 1) * tb.eTy[k]);
      const Eigen::MatrixXd ty = invJ * (m.B(1, 0) * tb.eTx[k] + m.B(1, 1) * tb.eTy[k]);
      ntau.rightCols(tb.ntau) = f.n.x() * tx + f.n.y() * ty;
    } else {
      const Eigen::MatrixXd dx = invJ * (m.B(0, 0) * tb.eXDx[k] + m.B(0, 1) * tb.eXDy[k]);
      const Eigen::MatrixXd dy = invJ * (m.B(1, 0) * tb.eXDx[k] + m.B(1, 1) * tb.eXDy[k]);
      ntau = f.n.x() * dx + f.n.y() * dy;
    }
    // (Xi n) components
    Eigen::MatrixXd Xin_x = f.n.x() * exx + f.n.y() * exy;
    Eigen::MatrixXd Xin_y = f.n.x() * exy + f.n.y() * eyy;
    for (int q = 0; q < tb.er.size(); ++q) {
      const double s = tb.er.s[q];
      const double wl = tb.er.w[q] * f.length;
      for (int d = 0; d < 6; ++d) {
        // the six uhat dofs supported on this edge: (value,gx,gy) at both ends
        const int vtx = (d < 3) ? ia : ib;
        const int comp = d % 3;
        UhatElemDofs dofs{};
        dofs[3 * vtx + comp] = 1.0;
        const EdgeTrace tr = edge_trace(g, dofs, k);
        const double v = tr.value(s);
        const Vec2 gr = tr.gradient(s);
        const int col = uhat0 + 3 * vtx + comp;
        B.col(col).tail(nmix) -= wl * v * ntau.row(q).transpose();
        B.col(col).segment(nz, nxi) +=
            wl * (gr.x() * Xin_x.row(q) + gr.y() * Xin_y.row(q)).transpose();
      }
    }
  }
  // qhat columns: +<qhat, z> via the dual functionals of the z tests
  const int qhat0 = uhat0 + 9;
  for (int j = 0; j < 3; ++j)
    B.col(qhat0 + j).head(nz) = tb.z_vertex.row(j).transpose();
  for (int k = 0; k < 3; ++k) {
    const EdgeFrame f = g.frame(k);
    B.col(qhat0 + 3 + k).head(nz) = tb.z_edge_mean.row(k).transpose();
    // int_E n . grad z ds = L * (B^{-1} n) . int_Ehat gradhat z dshat
    const Vec2 nb = m.Binv * f.n;
    B.col(qhat0 + 6 + k).head(nz) =
        f.length * (nb.x() * tb.z_edge_gx.row(k) + nb.y() * tb.z_edge_gy.row(k)).transpose();
  }
  return B;
}

Eigen::VectorXd ElementKernel::local_load(const TriGeom& g,
                                          const std::function<double(const Vec2&)>& f) const {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n_test_);
  if (!f) return l;
  const Tables& tb = *tab_;
  const AffineMap m = g.map();
  Eigen::VectorXd fw(tb.vq.size());
  for (int q = 0; q < tb.vq.size(); ++q)
    fw[q] = -m.J * tb.vq.weights[q] * f(m.F(tb.vq.point(q)));
  l.head(tb.nz) = tb.Zv.transpose() * fw;
  return l;
}

LocalSystem ElementKernel::local_system(const TriGeom& g,
                                        const std::function<double(const Vec2&)>& f) const {
  return {local_gram(g), local_b(g), local_load(g, f)};
}

DofMap::DofMap(const Mesh& mesh, const SchemeConfig& scheme,
               const Eigen::VectorXd* boundary_data) {
  const bool theta = (scheme.kind == SchemeKind::Theta);
  fields_per_ = theta ? 6 : 4;
  cols_ = fields_per_ + 18;
  counts_ = count_dofs(mesh, scheme.kind);
  const int nT = mesh.num_triangles();
  uhat_offset_ = fields_per_ * nT;
  qhat_offset_ = uhat_offset_ + counts_.uhat;
  n_free_ = qhat_offset_ + counts_.qhat;

  std::vector<int> interior_index(mesh.num_vertices(), -1);
  int iv = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.vertex_on_boundary(v)) interior_index[v] = iv++;

  const QhatLayout qlay(mesh);
  map_.assign(size_t(cols_) * nT, {});
  fixed_.assign(size_t(cols_) * nT, 0.0);
  for (int t = 0; t < nT; ++t) {
    int c = 0;
    for (int k = 0; k < fields_per_; ++k, ++c)
      map_[cols_ * t + c] = {{fields_per_ * t + k, 1.0}};
    for (int mloc = 0; mloc < 3; ++mloc) {
      const int v = mesh.triangle(t).v[mloc];
      for (int comp = 0; comp < 3; ++comp, ++c) {
        if (interior_index[v] >= 0) {
          map_[cols_ * t + c] = {{uhat_offset_ + 3 * interior_index[v] + comp, 1.0}};
        } else if (boundary_data) {
          fixed_[cols_ * t + c] = (*boundary_data)[3 * v + comp];
        }
      }
    }
    for (int j = 0; j < 9; ++j, ++c) {
      for (const auto& tm : qlay.terms(t, j))
        map_[cols_ * t + c].push_back({tm.dof + qhat_offset_, tm.w});
    }
  }
}

Eigen::VectorXd DofMap::local_values(int t, const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(cols_);
  for (int c = 0; c < cols_; ++c) {
    double v = fixed_[cols_ * t + c];
    for (const Term& tm : map_[cols_ * t + c]) v += tm.w * x[tm.dof];
    out[c] = v;
  }
  return out;
}

namespace {

ElementContrib condense(const LocalSystem& ls, int t) {
  Eigen::VectorXd d = ls.G.diagonal();
  for (int i = 0; i < d.size(); ++i) d[i] = 1.0 / std::sqrt(std::max(d[i], 1e-300));
  const Eigen::MatrixXd Gs = d.asDiagonal() * ls.G * d.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(Gs);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("local Gram Cholesky failed on element " + std::to_string(t));
  const Eigen::MatrixXd Bs = d.asDiagonal() * ls.B;
  const Eigen::VectorXd lsca = d.asDiagonal() * ls.l;
  const Eigen::MatrixXd GiB = llt.solve(Bs);
  const Eigen::VectorXd Gil = llt.solve(lsca);
  ElementContrib out;
  out.K = Bs.transpose() * GiB;
  out.r = Bs.transpose() * Gil;
  out.l_energy = lsca.dot(Gil);
  return out;
}

} // namespace

std::vector<ElementContrib> element_contributions(const Mesh& mesh, const ElementKernel& kernel,
                                                  const std::function<double(const Vec2&)>& f,
                                                  bool parallel) {
  const int nT = mesh.num_triangles();
  std::vector<ElementContrib> out(nT);
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (int t = 0; t < nT; ++t) out[t] = condense(kernel.local_system(mesh.geometry(t), f), t);
  } else {
    for (int t = 0; t < nT; ++t) out[t] = condense(kernel.local_system(mesh.geometry(t), f), t);
  }
  return out;
}

GlobalSystem assemble_global(const Mesh& mesh, const DofMap& map,
                             const std::vector<ElementContrib>& contribs) {
  const int n = map.n_free();
  GlobalSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  const int cols = map.cols_per_element();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementContrib& ec = contribs[t];
    for (int i = 0; i < cols; ++i) {
      for (const auto& ti : map.terms(t, i)) {
        sys.rhs[ti.dof] += ti.w * ec.r[i];
        for (int j = 0; j < cols; ++j) {
          const double fx = map.fixed_value(t, j);
          if (fx != 0.0) sys.rhs[ti.dof] -= ti.w * ec.K(i, j) * fx;
          for (const auto& tj : map.terms(t, j))
            trip.emplace_back(ti.dof, tj.dof, ti.w * tj.w * ec.K(i, j));
        }
      }
    }
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

SolveReport solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& rhs) {
  const int n = int(A.rows());
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = 1.0 / std::sqrt(std::max(A.coeff(i, i), 1e-300));
  Eigen::SparseMatrix<double> As = d.asDiagonal() * A * d.asDiagonal();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(As);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("global Cholesky factorization failed (matrix not SPD?)");
  Eigen::VectorXd x = d.asDiagonal() * llt.solve(Eigen::VectorXd(d.asDiagonal() * rhs));
  // iterative refinement against the unscaled system
  for (int it = 0; it < 2; ++it) {
    const Eigen::VectorXd res = rhs - A * x;
    x += d.asDiagonal() * llt.solve(Eigen::VectorXd(d.asDiagonal() * res));
  }
  SolveReport rep;
  rep.x = x;
  const double denom = std::max(rhs.norm(), 1e-300);
  rep.rel_residual = (A * x - rhs).norm() / denom;
  return rep;
}

DpgSystem::DpgSystem(const Mesh& mesh, const SchemeConfig& scheme, const ProblemFns& data,
                     bool parallel)
    : mesh_(&mesh),
      kernel_(scheme),
      boundary_data_(sample_boundary_data(mesh, data)),
      map_(mesh, scheme, &boundary_data_),
      contribs_(element_contributions(mesh, kernel_, data.f, parallel)),
      sys_(assemble_global(mesh, map_, contribs_)),
      parallel_(parallel) {}

SolveReport DpgSystem::solve() const { return solve_spd(sys_.A, sys_.rhs); }

double DpgSystem::element_eta2(int t, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd xl = map_.local_values(t, x);
  const ElementContrib& ec = contribs_[t];
  const double v = ec.l_energy - 2.0 * xl.dot(ec.r) + xl.dot(ec.K * xl);
  return std::max(v, 0.0);
}

double DpgSystem::total_residual_energy(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (int t = 0; t < mesh_->num_triangles(); ++t) s += element_eta2(t, x);
  return s;
}

double DpgSystem::u(int t, const Eigen::VectorXd& x) const {
  return x[map_.field_offset(t)];
}

Vec2 DpgSystem::theta(int t, const Eigen::VectorXd& x) const {
  if (scheme().kind != SchemeKind::Theta) return Vec2::Zero();
  const int o = map_.field_offset(t);
  return Vec2(x[o + 1], x[o + 2]);
}

Vec3 DpgSystem::M_voigt(int t, const Eigen::VectorXd& x) const {
  const int o = map_.field_offset(t) + (scheme().kind == SchemeKind::Theta ? 3 : 1);
  return Vec3(x[o], x[o + 1], x[o + 2]);
}

Eigen::VectorXd sample_boundary_data(const Mesh& mesh, const ProblemFns& data) {
  Eigen::VectorXd bd = Eigen::VectorXd::Zero(3 * mesh.num_vertices());
  if (!data.exact_u) return bd;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.vertex_on_boundary(v)) continue;
    const Vec2 p = mesh.vertex(v);
    bd[3 * v] = data.exact_u(p);
    if (data.exact_grad) {
      const Vec2 g = data.exact_grad(p);
      bd[3 * v + 1] = g.x();
      bd[3 * v + 2] = g.y();
    }
  }
  return bd;
}

ConsistencyReport scheme_consistency_check(const Mesh& mesh, const MaterialTensor& mat,
                                           const ProblemFns& data) {
  SchemeConfig a{SchemeKind::Theta, 4, mat};
  SchemeConfig b{SchemeKind::Plain, 4, mat};
  DpgSystem sa(mesh, a, data), sb(mesh, b, data);
  const Eigen::VectorXd xa = sa.solve().x, xb = sb.solve().x;
  ConsistencyReport rep;
  double du2 = 0.0, dM2 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.triangle_area(t);
    const double du = sa.u(t, xa) - sb.u(t, xb);
    const Vec3 dM = sa.M_voigt(t, xa) - sb.M_voigt(t, xb);
    du2 += area * du * du;
    dM2 += area * voigt_dot(dM, dM);
  }
  rep.du = std::sqrt(du2);
  rep.dM = std::sqrt(dM2);
  return rep;
}

} // namespace platedpg
