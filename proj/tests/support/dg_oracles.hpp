#pragma once

// Naive O(p^{2d}) reference implementations of the DG operators: direct
// loops over all basis pairs and quadrature points, no sum factorization, no
// shared kernels with the fast paths.

#include <vector>

#include "support/oracles.hpp"
#include "tpdg/ops/discretization.hpp"

namespace tpdg::test {

/// Tensor basis value of local index I at the volume quadrature point q,
/// optionally differentiated (in reference coordinates) along `deriv`.
inline double naive_basis_vol(const tpdg::Discretization& sys, int I, int q, int deriv = -1) {
  const int n = sys.n1d, mu = sys.mu;
  double val = 1.0;
  int rem_i = I, rem_q = q;
  for (int a = 0; a < sys.dim; ++a) {
    const int ia = rem_i % n;
    const int qa = rem_q % mu;
    val *= (a == deriv) ? sys.ref.d(qa, ia) : sys.ref.g(qa, ia);
    rem_i /= n;
    rem_q /= mu;
  }
  return val;
}

/// Basis value at a face quadrature point (normal coordinate pinned to the
/// face).
inline double naive_basis_face(const tpdg::Discretization& sys, int face, int I, int qf) {
  const int n = sys.n1d, mu = sys.mu;
  const int axis = tpdg::face_axis(face);
  const double xnorm = tpdg::face_side(face) == 0 ? 0.0 : 1.0;
  const auto tang = tpdg::face_param_axes(sys.dim, axis);
  int idx[3];
  int rem = I;
  for (int a = 0; a < sys.dim; ++a) {
    idx[a] = rem % n;
    rem /= n;
  }
  double val = sys.ref.basis_value(idx[axis], xnorm);
  val *= sys.ref.g(qf % mu, idx[tang[0]]);
  if (sys.dim == 3) val *= sys.ref.g(qf / mu, idx[tang[1]]);
  return val;
}

/// State at a volume quadrature point by direct basis summation.
inline void naive_state_vol(const tpdg::Discretization& sys, const tpdg::StateVector& u, int e, int q,
                            double* out) {
  for (int c = 0; c < sys.n_c; ++c) {
    double s = 0.0;
    for (int I = 0; I < sys.npe; ++I) s += u.component(e, c)[I] * naive_basis_vol(sys, I, q);
    out[c] = s;
  }
}

inline void naive_state_face(const tpdg::Discretization& sys, const tpdg::StateVector& u, int e, int face,
                             int qf, double* out) {
  for (int c = 0; c < sys.n_c; ++c) {
    double s = 0.0;
    for (int I = 0; I < sys.npe; ++I) s += u.component(e, c)[I] * naive_basis_face(sys, face, I, qf);
    out[c] = s;
  }
}

inline double naive_vol_weight(const tpdg::Discretization& sys, int q) {
  double w = 1.0;
  int rem = q;
  for (int a = 0; a < sys.dim; ++a) {
    w *= sys.ref.qweights[rem % sys.mu];
    rem /= sys.mu;
  }
  return w;
}

/// Reference residual by direct quadrature over all basis functions.
inline tpdg::StateVector naive_residual(const tpdg::Discretization& sys, const tpdg::StateVector& u,
                                        double t) {
  tpdg::StateVector out = sys.make_state();
  const int nc = sys.n_c, d = sys.dim;
  std::vector<double> uq(nc), fq(std::size_t(d) * nc), um(nc), up(nc), fhat(nc);
  for (int e = 0; e < sys.mesh.n_elements; ++e) {
    for (int q = 0; q < sys.nqv; ++q) {
      naive_state_vol(sys, u, e, q, uq.data());
      sys.law.flux(uq.data(), sys.mesh.vol_x_at(e) + std::size_t(q) * d, fq.data());
      const double* adj = sys.mesh.adj_at(e) + std::size_t(q) * d * d;
      const double w = naive_vol_weight(sys, q);
      for (int I = 0; I < sys.npe; ++I)
        for (int k = 0; k < d; ++k) {
          const double dphi = naive_basis_vol(sys, I, q, k);
          for (int c = 0; c < nc; ++c) {
            double ft = 0.0;
            for (int m = 0; m < d; ++m) ft += adj[k * d + m] * fq[std::size_t(m) * nc + c];
            out.component(e, c)[I] += w * ft * dphi;
          }
        }
    }
    for (int f = 0; f < 2 * d; ++f) {
      const auto& fc = sys.mesh.faces[e][f];
      const double* fx = sys.mesh.face_x_at(e, f);
      const double* fn = sys.mesh.face_n_at(e, f);
      const double* fw = sys.mesh.face_w_at(e, f);
      for (int qf = 0; qf < sys.nqf; ++qf) {
        naive_state_face(sys, u, e, f, qf, um.data());
        if (fc.neighbor >= 0) {
          const auto [qa, qb] = tpdg::orient_face_coords(sys.dim, fc.orientation, sys.mu, qf % sys.mu,
                                                         sys.dim == 3 ? qf / sys.mu : 0);
          const int qn = (sys.dim == 3 ? qb * sys.mu : 0) + qa;
          naive_state_face(sys, u, fc.neighbor, fc.neighbor_face, qn, up.data());
        } else {
          sys.law.boundary_state(fx + std::size_t(qf) * d, t, um.data(), up.data());
        }
        sys.law.num_flux(um.data(), up.data(), fn + std::size_t(qf) * d, fx + std::size_t(qf) * d,
                         fhat.data());
        for (int I = 0; I < sys.npe; ++I) {
          const double phi = naive_basis_face(sys, f, I, qf);
          if (phi == 0.0) continue;
          for (int c = 0; c < nc; ++c) out.component(e, c)[I] -= fw[qf] * fhat[c] * phi;
        }
      }
    }
  }
  return out;
}

/// Fully assembled global matrix of a*M + b*J at the linearization state u
/// (direct quadrature; all element and neighbor couplings).
inline tpdg::SmallMatrix naive_global_operator(const tpdg::Discretization& sys, const tpdg::StateVector& u,
                                               double t, double a, double b) {
  const int nc = sys.n_c, d = sys.dim, npe = sys.npe;
  const int block = nc * npe;
  const int n = sys.mesh.n_elements * block;
  tpdg::SmallMatrix mat(n, n);
  auto gdof = [&](int e, int c, int I) { return e * block + c * npe + I; };

  std::vector<double> uq(nc), df(std::size_t(d) * nc * nc), um(nc), up(nc);
  std::vector<double> dfm(std::size_t(nc) * nc), dfp(std::size_t(nc) * nc);
  for (int e = 0; e < sys.mesh.n_elements; ++e) {
    // Mass.
    if (a != 0.0) {
      const double* jd = sys.mesh.jdet_at(e);
      for (int q = 0; q < sys.nqv; ++q) {
        const double w = naive_vol_weight(sys, q) * jd[q];
        for (int I = 0; I < npe; ++I) {
          const double pI = naive_basis_vol(sys, I, q);
          if (pI == 0.0) continue;
          for (int J = 0; J < npe; ++J) {
            const double pJ = naive_basis_vol(sys, J, q);
            for (int c = 0; c < nc; ++c) mat(gdof(e, c, I), gdof(e, c, J)) += a * w * pI * pJ;
          }
        }
      }
    }
    if (b == 0.0) continue;
    // Volume Jacobian.
    for (int q = 0; q < sys.nqv; ++q) {
      naive_state_vol(sys, u, e, q, uq.data());
      sys.law.flux_jacobian(uq.data(), sys.mesh.vol_x_at(e) + std::size_t(q) * d, df.data());
      const double* adj = sys.mesh.adj_at(e) + std::size_t(q) * d * d;
      const double w = naive_vol_weight(sys, q);
      for (int I = 0; I < npe; ++I)
        for (int k = 0; k < d; ++k) {
          const double dphi = naive_basis_vol(sys, I, q, k);
          if (dphi == 0.0) continue;
          for (int J = 0; J < npe; ++J) {
            const double pJ = naive_basis_vol(sys, J, q);
            if (pJ == 0.0) continue;
            for (int r = 0; r < nc; ++r)
              for (int c = 0; c < nc; ++c) {
                double ft = 0.0;
                for (int m = 0; m < d; ++m) ft += adj[k * d + m] * df[(std::size_t(m) * nc + r) * nc + c];
                mat(gdof(e, r, I), gdof(e, c, J)) += b * w * ft * dphi * pJ;
              }
          }
        }
    }
    // Face Jacobians (both traces).
    for (int f = 0; f < 2 * d; ++f) {
      const auto& fc = sys.mesh.faces[e][f];
      const double* fx = sys.mesh.face_x_at(e, f);
      const double* fn = sys.mesh.face_n_at(e, f);
      const double* fw = sys.mesh.face_w_at(e, f);
      for (int qf = 0; qf < sys.nqf; ++qf) {
        naive_state_face(sys, u, e, f, qf, um.data());
        int qn = -1;
        if (fc.neighbor >= 0) {
          const auto [qa, qb] = tpdg::orient_face_coords(sys.dim, fc.orientation, sys.mu, qf % sys.mu,
                                                         sys.dim == 3 ? qf / sys.mu : 0);
          qn = (sys.dim == 3 ? qb * sys.mu : 0) + qa;
          naive_state_face(sys, u, fc.neighbor, fc.neighbor_face, qn, up.data());
        } else {
          sys.law.boundary_state(fx + std::size_t(qf) * d, t, um.data(), up.data());
        }
        sys.law.num_flux_jac_minus(um.data(), up.data(), fn + std::size_t(qf) * d,
                                   fx + std::size_t(qf) * d, dfm.data());
        if (fc.neighbor >= 0)
          sys.law.num_flux_jac_plus(um.data(), up.data(), fn + std::size_t(qf) * d,
                                    fx + std::size_t(qf) * d, dfp.data());
        for (int I = 0; I < npe; ++I) {
          const double pI = naive_basis_face(sys, f, I, qf);
          if (pI == 0.0) continue;
          for (int J = 0; J < npe; ++J) {
            const double pJ = naive_basis_face(sys, f, J, qf);
            if (pJ != 0.0)
              for (int r = 0; r < nc; ++r)
                for (int c = 0; c < nc; ++c)
                  mat(gdof(e, r, I), gdof(e, c, J)) -= b * fw[qf] * dfm[r * nc + c] * pI * pJ;
            if (fc.neighbor >= 0) {
              const double pJn = naive_basis_face(sys, fc.neighbor_face, J, qn);
              if (pJn != 0.0)
                for (int r = 0; r < nc; ++r)
                  for (int c = 0; c < nc; ++c)
                    mat(gdof(e, r, I), gdof(fc.neighbor, c, J)) -= b * fw[qf] * dfp[r * nc + c] * pI * pJn;
            }
          }
        }
      }
    }
  }
  return mat;
}

} // namespace tpdg::test
