#pragma once

#include <vector>

#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg::kernels {

/// dst[..., i', ...] = sum_i M(i', i) src[..., i, ...] along `axis` of a
/// d-dimensional tensor whose FIRST axis is fastest (stride 1).
inline void axis_apply(const SmallMatrix& m, int d, const int* ext, int axis, const double* src,
                       double* dst) {
  long inner = 1, outer = 1;
  for (int a = 0; a < axis; ++a) inner *= ext[a];
  for (int a = axis + 1; a < d; ++a) outer *= ext[a];
  const int nin = m.cols();
  const int nout = m.rows();
  for (long o = 0; o < outer; ++o) {
    const double* s = src + o * nin * inner;
    double* t = dst + o * nout * inner;
    for (long k = 0; k < nout * inner; ++k) t[k] = 0.0;
    for (int j = 0; j < nin; ++j) {
      const double* srow = s + j * inner;
      for (int i = 0; i < nout; ++i) {
        const double mij = m(i, j);
        if (mij == 0.0) continue;
        double* trow = t + long(i) * inner;
        for (long q = 0; q < inner; ++q) trow[q] += mij * srow[q];
      }
    }
  }
}

/// In-place LU solve along `axis` of a d-dimensional tensor (first axis
/// fastest); every fiber along the axis is replaced by lu^{-1} fiber.
inline void axis_solve(const LuFactor& lu, int d, const int* ext, int axis, double* data,
                       std::vector<double>& fiber, std::vector<double>& out) {
  const int n = ext[axis];
  long inner = 1, outer = 1;
  for (int a = 0; a < axis; ++a) inner *= ext[a];
  for (int a = axis + 1; a < d; ++a) outer *= ext[a];
  fiber.resize(n);
  out.resize(n);
  for (long o = 0; o < outer; ++o)
    for (long i = 0; i < inner; ++i) {
      double* base = data + o * n * inner + i;
      for (int k = 0; k < n; ++k) fiber[k] = base[k * inner];
      lu.solve(fiber, out);
      for (int k = 0; k < n; ++k) base[k * inner] = out[k];
    }
}

/// Workspace providing the per-element tensor evaluations. Reused across
/// elements within a thread.
struct Scratch {
  std::vector<double> a, b, c, d, e, f;
};

/// vals (mu^dim) = (G (x) ... (x) G) coeff ((p+1)^dim), first axis fastest.
inline void eval_at_quad(const SmallMatrix& g, int dim, const double* coeff, double* vals,
                         Scratch& ws) {
  const int n = g.cols(), mu = g.rows();
  int ext[3] = {n, n, n};
  if (dim == 2) {
    ws.a.resize(std::size_t(mu) * n);
    axis_apply(g, 2, ext, 0, coeff, ws.a.data());
    ext[0] = mu;
    axis_apply(g, 2, ext, 1, ws.a.data(), vals);
  } else {
    ws.a.resize(std::size_t(mu) * n * n);
    ws.b.resize(std::size_t(mu) * mu * n);
    axis_apply(g, 3, ext, 0, coeff, ws.a.data());
    ext[0] = mu;
    axis_apply(g, 3, ext, 1, ws.a.data(), ws.b.data());
    ext[1] = mu;
    axis_apply(g, 3, ext, 2, ws.b.data(), vals);
  }
}

/// out ((p+1)^dim) += Kron of G^T W factors with D^T W in slot `dslot`
/// (dslot = -1 for all-G) applied to field (mu^dim).
inline void integrate_back(const SmallMatrix& gw, const SmallMatrix& dw, int dim, int dslot,
                           const double* field, double* out, Scratch& ws) {
  const int n = gw.rows(), mu = gw.cols();
  int ext[3] = {mu, mu, mu};
  if (dim == 2) {
    ws.c.resize(std::size_t(n) * mu);
    axis_apply(dslot == 0 ? dw : gw, 2, ext, 0, field, ws.c.data());
    ext[0] = n;
    ws.d.resize(std::size_t(n) * n);
    axis_apply(dslot == 1 ? dw : gw, 2, ext, 1, ws.c.data(), ws.d.data());
    for (int i = 0; i < n * n; ++i) out[i] += ws.d[i];
  } else {
    ws.c.resize(std::size_t(n) * mu * mu);
    ws.d.resize(std::size_t(n) * n * mu);
    ws.e.resize(std::size_t(n) * n * n);
    axis_apply(dslot == 0 ? dw : gw, 3, ext, 0, field, ws.c.data());
    ext[0] = n;
    axis_apply(dslot == 1 ? dw : gw, 3, ext, 1, ws.c.data(), ws.d.data());
    ext[1] = n;
    axis_apply(dslot == 2 ? dw : gw, 3, ext, 2, ws.d.data(), ws.e.data());
    for (int i = 0; i < n * n * n; ++i) out[i] += ws.e[i];
  }
}

} // namespace tpdg::kernels
