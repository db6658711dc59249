#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg {

struct SvdResult {
  SmallMatrix u;                      // m x k
  std::vector<double> sigma;          // k, descending
  SmallMatrix v;                      // n x k
};

/// One-sided Jacobi SVD of a small dense matrix (k = min(m, n) triplets).
/// Plenty for the bidiagonal matrices produced by the Lanczos iteration.
inline SvdResult svd_small(const SmallMatrix& a, int max_sweeps = 60, double tol = 1e-14) {
  const int m = a.rows();
  const int n = a.cols();
  // Work on the taller orientation so columns are being orthogonalized.
  if (m < n) {
    SvdResult r = svd_small(a.transposed(), max_sweeps, tol);
    std::swap(r.u, r.v);
    return r;
  }
  SmallMatrix w = a;               // columns converge to sigma_j * u_j
  SmallMatrix v = SmallMatrix::identity(n);
  const double scale = std::max(a.max_abs(), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < m; ++i) {
          app += w(i, p) * w(i, p);
          aqq += w(i, q) * w(i, q);
          apq += w(i, p) * w(i, q);
        }
        if (std::abs(apq) <= tol * scale * scale) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (int i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sig(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += w(i, j) * w(i, j);
    sig[j] = std::sqrt(s);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return sig[x] > sig[y]; });

  SvdResult r;
  r.u = SmallMatrix(m, n);
  r.v = SmallMatrix(n, n);
  r.sigma.resize(n);
  for (int k = 0; k < n; ++k) {
    const int j = order[k];
    r.sigma[k] = sig[j];
    const double inv = sig[j] > 0.0 ? 1.0 / sig[j] : 0.0;
    for (int i = 0; i < m; ++i) r.u(i, k) = w(i, j) * inv;
    for (int i = 0; i < n; ++i) r.v(i, k) = v(i, j);
  }
  return r;
}

} // namespace tpdg
