#pragma once

#include <vector>

#include "tpdg/ops/linearized.hpp"
#include "tpdg/tensor/shuffle.hpp"

namespace tpdg {

namespace kernels {

/// Matrix-free shuffled products for one element's diagonal block
/// A = a M + b J under the Van Loan blocking: in 2D the outer (block) index
/// is (component, y), the inner index is x; in 3D the outer index is
/// (component, z), the inner index is (x, y). Small mode treats one
/// component with the cross-component coupling dropped.
///
/// apply maps the inner-pair space R^{m2 n2} to the outer-pair space
/// R^{m1 n1}; apply_transpose the reverse. Face terms exploit the
/// Gauss-Lobatto trace sparsity: only the face node layer of the inner or
/// outer indices contributes.
struct ElementShuffled {
  const Discretization* sys;
  const LinearizationCache* cache;
  int e = 0;
  double a = 1.0; // mass coefficient
  double b = 0.0; // jacobian coefficient
  BlockMode mode = BlockMode::full;
  int comp = 0; // component, small mode only

  int q1() const { return sys->n1d; }
  int ncb() const { return mode == BlockMode::full ? sys->n_c : 1; } // components in the block
  int m1() const { return ncb() * q1(); }
  int m2() const { return sys->dim == 2 ? q1() : q1() * q1(); }

  double dft_entry(int dir, int q, int r, int c) const {
    const int nc = sys->n_c;
    const int rr = mode == BlockMode::full ? r : comp;
    const int cc = mode == BlockMode::full ? c : comp;
    return cache->dft_at(*sys, e, dir)[std::size_t(q) * nc * nc + rr * nc + cc];
  }
  double dfm_entry(int f, int q, int r, int c) const {
    const int nc = sys->n_c;
    const int rr = mode == BlockMode::full ? r : comp;
    const int cc = mode == BlockMode::full ? c : comp;
    return cache->dfm_at(*sys, e, f)[std::size_t(q) * nc * nc + rr * nc + cc];
  }

  void apply(std::span<const double> v, std::span<double> u) const {
    if (sys->dim == 2)
      apply_2d(v, u);
    else
      apply_3d(v, u);
  }
  void apply_transpose(std::span<const double> u, std::span<double> v) const {
    if (sys->dim == 2)
      apply_t_2d(u, v);
    else
      apply_t_3d(u, v);
  }

private:
  // ----- 2D -----------------------------------------------------------

  void apply_2d(std::span<const double> v, std::span<double> u) const {
    const int q = q1(), mu = sys->mu, nc = ncb();
    const auto& ref = sys->ref;
    auto V = [&](int a1, int e1) { return v[std::size_t(e1) * q + a1]; };

    // Volume chains over the x quadrature points.
    std::vector<double> t_gg(mu, 0.0), t_dg(mu, 0.0);
    for (int al = 0; al < mu; ++al) {
      double sg = 0.0, sd = 0.0;
      for (int ec = 0; ec < q; ++ec) {
        double colg = 0.0, cold = 0.0;
        for (int ar = 0; ar < q; ++ar) {
          colg += ref.g(al, ar) * V(ar, ec);
          cold += ref.d(al, ar) * V(ar, ec);
        }
        sg += ref.g(al, ec) * colg;
        sd += ref.g(al, ec) * cold;
      }
      t_gg[al] = sg;
      t_dg[al] = sd;
    }

    const double* jd = sys->mesh.jdet_at(e);
    std::vector<double> sm(mu, 0.0), r1(std::size_t(nc) * nc * mu, 0.0), r2(std::size_t(nc) * nc * mu, 0.0);
    for (int be = 0; be < mu; ++be)
      for (int al = 0; al < mu; ++al) {
        const int qv = be * mu + al;
        const double w = ref.qweights[al];
        sm[be] += w * jd[qv] * t_gg[al];
        if (b != 0.0)
          for (int cr = 0; cr < nc; ++cr)
            for (int cc = 0; cc < nc; ++cc) {
              r1[(std::size_t(cr) * nc + cc) * mu + be] += w * dft_entry(0, qv, cr, cc) * t_dg[al];
              r2[(std::size_t(cr) * nc + cc) * mu + be] += w * dft_entry(1, qv, cr, cc) * t_gg[al];
            }
      }

    std::fill(u.begin(), u.end(), 0.0);
    const int m1v = m1();
    for (int cc = 0; cc < nc; ++cc)
      for (int dcol = 0; dcol < q; ++dcol)
        for (int cr = 0; cr < nc; ++cr)
          for (int br = 0; br < q; ++br) {
            double s = 0.0;
            for (int be = 0; be < mu; ++be) {
              const double wb = ref.qweights[be];
              double val = 0.0;
              if (cr == cc && a != 0.0) val += a * sm[be];
              if (b != 0.0) val += b * r1[(std::size_t(cr) * nc + cc) * mu + be];
              s += wb * ref.g(be, br) * ref.g(be, dcol) * val;
              if (b != 0.0)
                s += wb * ref.d(be, br) * ref.g(be, dcol) * b * r2[(std::size_t(cr) * nc + cc) * mu + be];
            }
            u[(std::size_t(cc) * q + dcol) * m1v + cr * q + br] = s;
          }

    if (b == 0.0) return;
    // Faces. Axis-0 faces hit the inner corner entries; axis-1 faces hit the
    // outer node layers.
    for (int f = 0; f < 4; ++f) {
      const double* fw = sys->mesh.face_w_at(e, f);
      const int layer = face_side(f) == 0 ? 0 : q - 1;
      if (face_axis(f) == 0) {
        const double vcorner = V(layer, layer);
        for (int cc = 0; cc < nc; ++cc)
          for (int dcol = 0; dcol < q; ++dcol)
            for (int cr = 0; cr < nc; ++cr)
              for (int br = 0; br < q; ++br) {
                double s = 0.0;
                for (int be = 0; be < mu; ++be)
                  s += fw[be] * dfm_entry(f, be, cr, cc) * ref.g(be, br) * ref.g(be, dcol);
                u[(std::size_t(cc) * q + dcol) * m1v + cr * q + br] -= b * s * vcorner;
              }
      } else {
        for (int cc = 0; cc < nc; ++cc)
          for (int cr = 0; cr < nc; ++cr) {
            double s = 0.0;
            for (int al = 0; al < mu; ++al) s += fw[al] * dfm_entry(f, al, cr, cc) * t_gg[al];
            u[(std::size_t(cc) * q + layer) * m1v + cr * q + layer] -= b * s;
          }
      }
    }
  }

  void apply_t_2d(std::span<const double> u, std::span<double> v) const {
    const int q = q1(), mu = sys->mu, nc = ncb();
    const auto& ref = sys->ref;
    const int m1v = m1();
    auto U = [&](int cr, int br, int cc, int dcol) {
      return u[(std::size_t(cc) * q + dcol) * m1v + cr * q + br];
    };

    std::vector<double> h_gg(std::size_t(nc) * nc * mu, 0.0), h_dg(std::size_t(nc) * nc * mu, 0.0);
    for (int cr = 0; cr < nc; ++cr)
      for (int cc = 0; cc < nc; ++cc)
        for (int be = 0; be < mu; ++be) {
          double sg = 0.0, sd = 0.0;
          for (int dcol = 0; dcol < q; ++dcol) {
            double colg = 0.0, cold = 0.0;
            for (int br = 0; br < q; ++br) {
              colg += ref.g(be, br) * U(cr, br, cc, dcol);
              cold += ref.d(be, br) * U(cr, br, cc, dcol);
            }
            sg += ref.g(be, dcol) * colg;
            sd += ref.g(be, dcol) * cold;
          }
          h_gg[(std::size_t(cr) * nc + cc) * mu + be] = sg;
          h_dg[(std::size_t(cr) * nc + cc) * mu + be] = sd;
        }

    const double* jd = sys->mesh.jdet_at(e);
    std::vector<double> km(mu, 0.0), k1(mu, 0.0), k2(mu, 0.0);
    for (int be = 0; be < mu; ++be) {
      const double wb = ref.qweights[be];
      for (int al = 0; al < mu; ++al) {
        const int qv = be * mu + al;
        const double w = ref.qweights[al] * wb;
        double smass = 0.0;
        for (int c = 0; c < nc; ++c) smass += h_gg[(std::size_t(c) * nc + c) * mu + be];
        km[al] += w * jd[qv] * smass;
        if (b != 0.0) {
          double s1 = 0.0, s2 = 0.0;
          for (int cr = 0; cr < nc; ++cr)
            for (int cc = 0; cc < nc; ++cc) {
              s1 += dft_entry(0, qv, cr, cc) * h_gg[(std::size_t(cr) * nc + cc) * mu + be];
              s2 += dft_entry(1, qv, cr, cc) * h_dg[(std::size_t(cr) * nc + cc) * mu + be];
            }
          k1[al] += w * s1;
          k2[al] += w * s2;
        }
      }
    }

    std::fill(v.begin(), v.end(), 0.0);
    for (int ec = 0; ec < q; ++ec)
      for (int ar = 0; ar < q; ++ar) {
        double s = 0.0;
        for (int al = 0; al < mu; ++al) {
          s += ref.g(al, ar) * ref.g(al, ec) * (a * km[al] + b * k2[al]);
          s += ref.d(al, ar) * ref.g(al, ec) * b * k1[al];
        }
        v[std::size_t(ec) * q + ar] = s;
      }

    if (b == 0.0) return;
    for (int f = 0; f < 4; ++f) {
      const double* fw = sys->mesh.face_w_at(e, f);
      const int layer = face_side(f) == 0 ? 0 : q - 1;
      if (face_axis(f) == 0) {
        double s = 0.0;
        for (int be = 0; be < mu; ++be) {
          double sc = 0.0;
          for (int cr = 0; cr < nc; ++cr)
            for (int cc = 0; cc < nc; ++cc)
              sc += dfm_entry(f, be, cr, cc) * h_gg[(std::size_t(cr) * nc + cc) * mu + be];
          s += fw[be] * sc;
        }
        v[std::size_t(layer) * q + layer] -= b * s;
      } else {
        for (int al = 0; al < mu; ++al) {
          double sc = 0.0;
          for (int cr = 0; cr < nc; ++cr)
            for (int cc = 0; cc < nc; ++cc) sc += dfm_entry(f, al, cr, cc) * U(cr, layer, cc, layer);
          const double coef = b * fw[al] * sc;
          for (int ec = 0; ec < q; ++ec)
            for (int ar = 0; ar < q; ++ar) v[std::size_t(ec) * q + ar] -= coef * ref.g(al, ar) * ref.g(al, ec);
        }
      }
    }
  }

  // ----- 3D -----------------------------------------------------------

  void apply_3d(std::span<const double> v, std::span<double> u) const {
    const int q = q1(), mu = sys->mu, nc = ncb();
    const auto& ref = sys->ref;
    const int q2 = q * q;
    auto V = [&](int a1, int a2, int e1, int e2) {
      return v[(std::size_t(e2) * q + e1) * q2 + a2 * q + a1];
    };

    // T4 chains: derivative on the inner x row (F1), inner y row (F2), none.
    std::vector<double> a1g(std::size_t(mu) * q * q * q), a1d(std::size_t(mu) * q * q * q);
    for (int al = 0; al < mu; ++al)
      for (int e2 = 0; e2 < q; ++e2)
        for (int e1 = 0; e1 < q; ++e1)
          for (int a2 = 0; a2 < q; ++a2) {
            double sg = 0.0, sd = 0.0;
            for (int ar = 0; ar < q; ++ar) {
              sg += ref.g(al, ar) * V(ar, a2, e1, e2);
              sd += ref.d(al, ar) * V(ar, a2, e1, e2);
            }
            const std::size_t idx = ((std::size_t(al) * q + a2) * q + e1) * q + e2;
            a1g[idx] = sg;
            a1d[idx] = sd;
          }
    std::vector<double> t4x(std::size_t(mu) * mu, 0.0), t4y(std::size_t(mu) * mu, 0.0),
        t4g(std::size_t(mu) * mu, 0.0);
    std::vector<double> a2buf(std::size_t(q) * q);
    for (int al = 0; al < mu; ++al)
      for (int be = 0; be < mu; ++be) {
        double sx = 0.0, sy = 0.0, sg = 0.0;
        for (int e2 = 0; e2 < q; ++e2)
          for (int e1 = 0; e1 < q; ++e1) {
            double cx = 0.0, cy = 0.0, cg = 0.0;
            for (int a2 = 0; a2 < q; ++a2) {
              const std::size_t idg = ((std::size_t(al) * q + a2) * q + e1) * q + e2;
              cx += ref.g(be, a2) * a1d[idg];
              cy += ref.d(be, a2) * a1g[idg];
              cg += ref.g(be, a2) * a1g[idg];
            }
            const double gee = ref.g(al, e1) * ref.g(be, e2);
            sx += gee * cx;
            sy += gee * cy;
            sg += gee * cg;
          }
        t4x[std::size_t(al) * mu + be] = sx;
        t4y[std::size_t(al) * mu + be] = sy;
        t4g[std::size_t(al) * mu + be] = sg;
      }

    const double* jd = sys->mesh.jdet_at(e);
    std::vector<double> rm(mu, 0.0), r1(std::size_t(nc) * nc * mu, 0.0), r2(std::size_t(nc) * nc * mu, 0.0),
        r3(std::size_t(nc) * nc * mu, 0.0);
    for (int ga = 0; ga < mu; ++ga)
      for (int be = 0; be < mu; ++be)
        for (int al = 0; al < mu; ++al) {
          const int qv = (ga * mu + be) * mu + al;
          const double w = ref.qweights[al] * ref.qweights[be];
          rm[ga] += w * jd[qv] * t4g[std::size_t(al) * mu + be];
          if (b != 0.0)
            for (int cr = 0; cr < nc; ++cr)
              for (int cc = 0; cc < nc; ++cc) {
                const std::size_t rc = (std::size_t(cr) * nc + cc) * mu + ga;
                r1[rc] += w * dft_entry(0, qv, cr, cc) * t4x[std::size_t(al) * mu + be];
                r2[rc] += w * dft_entry(1, qv, cr, cc) * t4y[std::size_t(al) * mu + be];
                r3[rc] += w * dft_entry(2, qv, cr, cc) * t4g[std::size_t(al) * mu + be];
              }
        }

    std::fill(u.begin(), u.end(), 0.0);
    const int m1v = m1();
    for (int cc = 0; cc < nc; ++cc)
      for (int d3 = 0; d3 < q; ++d3)
        for (int cr = 0; cr < nc; ++cr)
          for (int b3 = 0; b3 < q; ++b3) {
            double s = 0.0;
            for (int ga = 0; ga < mu; ++ga) {
              const double wg = ref.qweights[ga];
              double val = 0.0;
              if (cr == cc && a != 0.0) val += a * rm[ga];
              if (b != 0.0)
                val += b * (r1[(std::size_t(cr) * nc + cc) * mu + ga] +
                            r2[(std::size_t(cr) * nc + cc) * mu + ga]);
              s += wg * ref.g(ga, b3) * ref.g(ga, d3) * val;
              if (b != 0.0)
                s += wg * ref.d(ga, b3) * ref.g(ga, d3) * b * r3[(std::size_t(cr) * nc + cc) * mu + ga];
            }
            u[(std::size_t(cc) * q + d3) * m1v + cr * q + b3] = s;
          }

    if (b == 0.0) return;
    std::vector<double> wbuf(mu);
    for (int f = 0; f < 6; ++f) {
      const double* fw = sys->mesh.face_w_at(e, f);
      const int layer = face_side(f) == 0 ? 0 : q - 1;
      const int axis = face_axis(f);
      if (axis == 2) {
        for (int cc = 0; cc < nc; ++cc)
          for (int cr = 0; cr < nc; ++cr) {
            double s = 0.0;
            for (int be = 0; be < mu; ++be)
              for (int al = 0; al < mu; ++al)
                s += fw[be * mu + al] * dfm_entry(f, be * mu + al, cr, cc) * t4g[std::size_t(al) * mu + be];
            u[(std::size_t(cc) * q + layer) * m1v + cr * q + layer] -= b * s;
          }
        continue;
      }
      // Axis 0: slice (a1 = e1 = layer); axis 1: slice (a2 = e2 = layer).
      for (int al = 0; al < mu; ++al) {
        double s = 0.0;
        for (int ej = 0; ej < q; ++ej)
          for (int aj = 0; aj < q; ++aj) {
            const double vv = axis == 0 ? V(layer, aj, layer, ej) : V(aj, layer, ej, layer);
            s += ref.g(al, ej) * ref.g(al, aj) * vv;
          }
        wbuf[al] = s;
      }
      for (int cc = 0; cc < nc; ++cc)
        for (int d3 = 0; d3 < q; ++d3)
          for (int cr = 0; cr < nc; ++cr)
            for (int b3 = 0; b3 < q; ++b3) {
              double s = 0.0;
              for (int be = 0; be < mu; ++be) {
                double inner = 0.0;
                for (int al = 0; al < mu; ++al)
                  inner += fw[be * mu + al] * dfm_entry(f, be * mu + al, cr, cc) * wbuf[al];
                s += ref.g(be, b3) * ref.g(be, d3) * inner;
              }
              u[(std::size_t(cc) * q + d3) * m1v + cr * q + b3] -= b * s;
            }
    }
  }

  void apply_t_3d(std::span<const double> u, std::span<double> v) const {
    const int q = q1(), mu = sys->mu, nc = ncb();
    const auto& ref = sys->ref;
    const int q2 = q * q;
    const int m1v = m1();
    auto U = [&](int cr, int b3, int cc, int d3) {
      return u[(std::size_t(cc) * q + d3) * m1v + cr * q + b3];
    };

    std::vector<double> h_gg(std::size_t(nc) * nc * mu, 0.0), h_dg(std::size_t(nc) * nc * mu, 0.0);
    for (int cr = 0; cr < nc; ++cr)
      for (int cc = 0; cc < nc; ++cc)
        for (int ga = 0; ga < mu; ++ga) {
          double sg = 0.0, sd = 0.0;
          for (int d3 = 0; d3 < q; ++d3) {
            double colg = 0.0, cold = 0.0;
            for (int b3 = 0; b3 < q; ++b3) {
              colg += ref.g(ga, b3) * U(cr, b3, cc, d3);
              cold += ref.d(ga, b3) * U(cr, b3, cc, d3);
            }
            sg += ref.g(ga, d3) * colg;
            sd += ref.g(ga, d3) * cold;
          }
          h_gg[(std::size_t(cr) * nc + cc) * mu + ga] = sg;
          h_dg[(std::size_t(cr) * nc + cc) * mu + ga] = sd;
        }

    const double* jd = sys->mesh.jdet_at(e);
    // K accumulators on the (alpha, beta) grid by derivative placement.
    std::vector<double> kx(std::size_t(mu) * mu, 0.0), ky(std::size_t(mu) * mu, 0.0),
        kg(std::size_t(mu) * mu, 0.0);
    for (int ga = 0; ga < mu; ++ga) {
      const double wg = ref.qweights[ga];
      for (int be = 0; be < mu; ++be)
        for (int al = 0; al < mu; ++al) {
          const int qv = (ga * mu + be) * mu + al;
          const double w = ref.qweights[al] * ref.qweights[be] * wg;
          double smass = 0.0;
          for (int c = 0; c < nc; ++c) smass += h_gg[(std::size_t(c) * nc + c) * mu + ga];
          kg[std::size_t(al) * mu + be] += a * w * jd[qv] * smass;
          if (b != 0.0) {
            double s1 = 0.0, s2 = 0.0, s3 = 0.0;
            for (int cr = 0; cr < nc; ++cr)
              for (int cc = 0; cc < nc; ++cc) {
                const double hg = h_gg[(std::size_t(cr) * nc + cc) * mu + ga];
                const double hd = h_dg[(std::size_t(cr) * nc + cc) * mu + ga];
                s1 += dft_entry(0, qv, cr, cc) * hg;
                s2 += dft_entry(1, qv, cr, cc) * hg;
                s3 += dft_entry(2, qv, cr, cc) * hd;
              }
            kx[std::size_t(al) * mu + be] += b * w * s1;
            ky[std::size_t(al) * mu + be] += b * w * s2;
            kg[std::size_t(al) * mu + be] += b * w * s3;
          }
        }
    }

    if (b != 0.0) {
      // z-faces fold into the all-G accumulator (same reverse chain).
      for (int f = 4; f < 6; ++f) {
        const double* fw = sys->mesh.face_w_at(e, f);
        const int layer = face_side(f) == 0 ? 0 : q - 1;
        for (int be = 0; be < mu; ++be)
          for (int al = 0; al < mu; ++al) {
            double sc = 0.0;
            for (int cr = 0; cr < nc; ++cr)
              for (int cc = 0; cc < nc; ++cc)
                sc += dfm_entry(f, be * mu + al, cr, cc) * U(cr, layer, cc, layer);
            kg[std::size_t(al) * mu + be] -= b * fw[be * mu + al] * sc;
          }
      }
    }

    // Reverse chains: P1 contracts beta, the final step contracts alpha.
    std::fill(v.begin(), v.end(), 0.0);
    std::vector<double> p1x(std::size_t(mu) * q * q), p1y(std::size_t(mu) * q * q),
        p1g(std::size_t(mu) * q * q);
    for (int al = 0; al < mu; ++al)
      for (int a2 = 0; a2 < q; ++a2)
        for (int e2 = 0; e2 < q; ++e2) {
          double sx = 0.0, sy = 0.0, sg = 0.0;
          for (int be = 0; be < mu; ++be) {
            const double ge2 = ref.g(be, e2);
            sx += ref.g(be, a2) * ge2 * kx[std::size_t(al) * mu + be];
            sy += ref.d(be, a2) * ge2 * ky[std::size_t(al) * mu + be];
            sg += ref.g(be, a2) * ge2 * kg[std::size_t(al) * mu + be];
          }
          const std::size_t idx = (std::size_t(al) * q + a2) * q + e2;
          p1x[idx] = sx;
          p1y[idx] = sy;
          p1g[idx] = sg;
        }
    for (int e2 = 0; e2 < q; ++e2)
      for (int e1 = 0; e1 < q; ++e1)
        for (int a2 = 0; a2 < q; ++a2)
          for (int a1 = 0; a1 < q; ++a1) {
            double s = 0.0;
            for (int al = 0; al < mu; ++al) {
              const double ge1 = ref.g(al, e1);
              const std::size_t idx = (std::size_t(al) * q + a2) * q + e2;
              s += ref.d(al, a1) * ge1 * p1x[idx];
              s += ref.g(al, a1) * ge1 * (p1y[idx] + p1g[idx]);
            }
            v[(std::size_t(e2) * q + e1) * q2 + a2 * q + a1] = s;
          }

    if (b == 0.0) return;
    // x- and y-face transposes write into their node-layer slices.
    std::vector<double> lbuf(mu);
    for (int f = 0; f < 4; ++f) {
      const double* fw = sys->mesh.face_w_at(e, f);
      const int layer = face_side(f) == 0 ? 0 : q - 1;
      const int axis = face_axis(f);
      for (int al = 0; al < mu; ++al) {
        double s = 0.0;
        for (int be = 0; be < mu; ++be) {
          double sc = 0.0;
          for (int cr = 0; cr < nc; ++cr)
            for (int cc = 0; cc < nc; ++cc)
              sc += dfm_entry(f, be * mu + al, cr, cc) * h_gg[(std::size_t(cr) * nc + cc) * mu + be];
          s += fw[be * mu + al] * sc;
        }
        lbuf[al] = s;
      }
      for (int ej = 0; ej < q; ++ej)
        for (int aj = 0; aj < q; ++aj) {
          double s = 0.0;
          for (int al = 0; al < mu; ++al) s += ref.g(al, aj) * ref.g(al, ej) * lbuf[al];
          if (axis == 0)
            v[(std::size_t(ej) * q + layer) * q2 + aj * q + layer] -= b * s;
          else
            v[(std::size_t(layer) * q + ej) * q2 + layer * q + aj] -= b * s;
        }
    }
  }

};

} // namespace kernels

/// Shuffled product of the element diagonal block with v, never assembling
/// the block. 2D cost O(p^3); 3D cost O(p^5) for the forward product.
inline std::vector<double> shuffled_apply(const LinearizedOperator& lin, int e,
                                          std::span<const double> v, BlockMode mode = BlockMode::full,
                                          int comp = 0) {
  lin.check_cache();
  kernels::ElementShuffled k{lin.sys, lin.cache, e, lin.mass_coeff(), lin.jac_coeff(), mode, comp};
  if (long(v.size()) != long(k.m2()) * k.m2()) throw ShapeError("shuffled_apply: input length mismatch");
  std::vector<double> u(std::size_t(k.m1()) * k.m1());
  k.apply(v, u);
  return u;
}

inline std::vector<double> shuffled_apply_transpose(const LinearizedOperator& lin, int e,
                                                    std::span<const double> u,
                                                    BlockMode mode = BlockMode::full, int comp = 0) {
  lin.check_cache();
  kernels::ElementShuffled k{lin.sys, lin.cache, e, lin.mass_coeff(), lin.jac_coeff(), mode, comp};
  if (long(u.size()) != long(k.m1()) * k.m1())
    throw ShapeError("shuffled_apply_transpose: input length mismatch");
  std::vector<double> v(std::size_t(k.m2()) * k.m2());
  k.apply_transpose(u, v);
  return v;
}

/// Wrap the element kernels as a ShuffledOperator for the Lanczos KSVD.
inline ShuffledOperator make_element_shuffled_operator(const LinearizedOperator& lin, int e,
                                                       BlockMode mode = BlockMode::full, int comp = 0) {
  lin.check_cache();
  auto kern = std::make_shared<kernels::ElementShuffled>(
      kernels::ElementShuffled{lin.sys, lin.cache, e, lin.mass_coeff(), lin.jac_coeff(), mode, comp});
  ShuffledOperator op;
  op.m1 = kern->m1();
  op.n1 = kern->m1();
  op.m2 = kern->m2();
  op.n2 = kern->m2();
  op.apply = [kern](std::span<const double> x, std::span<double> y) { kern->apply(x, y); };
  op.apply_transpose = [kern](std::span<const double> x, std::span<double> y) {
    kern->apply_transpose(x, y);
  };
  return op;
}

} // namespace tpdg
