#pragma once

#include <cmath>
#include <string>

#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg {

/// Real Schur factorization C = Q T Q^T with Q orthogonal and T
/// quasi-upper-triangular (1x1 and 2x2 diagonal blocks). 2x2 blocks hold
/// complex-conjugate eigenvalue pairs and are standardized to equal diagonal
/// entries.
struct SchurPair {
  SmallMatrix q;
  SmallMatrix t;
};

namespace detail {

inline void apply_rot_left(SmallMatrix& m, int i, int j, double c, double s, int col_lo, int col_hi) {
  for (int k = col_lo; k < col_hi; ++k) {
    const double x = m(i, k), y = m(j, k);
    m(i, k) = c * x + s * y;
    m(j, k) = -s * x + c * y;
  }
}

inline void apply_rot_right(SmallMatrix& m, int i, int j, double c, double s, int row_lo, int row_hi) {
  for (int k = row_lo; k < row_hi; ++k) {
    const double x = m(k, i), y = m(k, j);
    m(k, i) = c * x + s * y;
    m(k, j) = -s * x + c * y;
  }
}

/// Householder reduction to upper Hessenberg form, accumulating Q.
inline void hessenberg(SmallMatrix& h, SmallMatrix& q) {
  const int n = h.rows();
  std::vector<double> v(n);
  for (int k = 0; k + 2 < n; ++k) {
    double norm = 0.0;
    for (int i = k + 1; i < n; ++i) norm += h(i, k) * h(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = h(k + 1, k) >= 0.0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[i] = h(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    // H <- P H
    for (int j = k; j < n; ++j) {
      double dot = 0.0;
      for (int i = k + 1; i < n; ++i) dot += v[i] * h(i, j);
      dot *= beta;
      for (int i = k + 1; i < n; ++i) h(i, j) -= dot * v[i];
    }
    // H <- H P
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
      dot *= beta;
      for (int j = k + 1; j < n; ++j) h(i, j) -= dot * v[j];
    }
    // Q <- Q P
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = k + 1; j < n; ++j) dot += q(i, j) * v[j];
      dot *= beta;
      for (int j = k + 1; j < n; ++j) q(i, j) -= dot * v[j];
    }
    for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    h(k + 1, k) = alpha;
  }
}

/// Rotate the 2x2 block at (l, l) so that it is either upper triangular
/// (real eigenvalues) or has equal diagonal entries (complex pair). The
/// rotation is built in two exact stages: first equalize the diagonal, then,
/// if the off-diagonal product is non-negative (real eigenvalues), a second
/// rotation annihilates the subdiagonal algebraically.
inline void standardize_2x2(SmallMatrix& h, SmallMatrix& q, int l) {
  const int n = h.rows();
  const double a = h(l, l), b = h(l, l + 1), c = h(l + 1, l), d = h(l + 1, l + 1);
  if (c == 0.0) return;
  // Stage 1: theta1 makes the rotated diagonal entries equal.
  const double theta1 = 0.5 * std::atan2(d - a, b + c);
  double cc = std::cos(theta1), ss = std::sin(theta1);
  const double bt = cc * cc * b - ss * ss * c + cc * ss * (d - a);
  const double ct = cc * cc * c - ss * ss * b + cc * ss * (d - a);
  bool real_pair = bt * ct >= 0.0;
  double theta = theta1;
  if (real_pair) {
    // Stage 2: with equal diagonals and bt*ct >= 0, t = sqrt(ct/bt) zeroes
    // the subdiagonal exactly.
    double theta2;
    if (bt == 0.0)
      theta2 = (ct == 0.0) ? 0.0 : 2.0 * std::atan(1.0); // pi/2
    else
      theta2 = std::atan(std::sqrt(ct / bt));
    theta += theta2;
  }
  cc = std::cos(theta);
  ss = std::sin(theta);
  apply_rot_left(h, l, l + 1, cc, ss, 0, n);
  apply_rot_right(h, l, l + 1, cc, ss, 0, n);
  apply_rot_right(q, l, l + 1, cc, ss, 0, n);
  if (real_pair) h(l + 1, l) = 0.0;
}

} // namespace detail

/// Hessenberg reduction followed by Francis double-shift QR iteration.
/// Throws ConvergenceError if the sweep budget is exhausted.
inline SchurPair real_schur(const SmallMatrix& c_in, int max_sweeps_per_eig = 60) {
  if (c_in.rows() != c_in.cols()) throw ShapeError("real_schur: matrix must be square");
  if (!c_in.all_finite()) throw ShapeError("real_schur: non-finite entries");
  const int n = c_in.rows();
  SmallMatrix h = c_in;
  SmallMatrix q = SmallMatrix::identity(n);
  if (n == 1) return {q, h};
  detail::hessenberg(h, q);

  const double eps = 2.3e-16;
  const double hnorm = std::max(h.inf_norm(), 1e-300);
  int m = n - 1;     // bottom of active block
  int iter = 0;
  int total = 0;
  const int budget = max_sweeps_per_eig * n;
  std::vector<double> v(3);

  while (m >= 0) {
    if (++total > budget)
      throw ConvergenceError("real_schur: QR iteration failed to converge after " +
                             std::to_string(budget) + " sweeps (n=" + std::to_string(n) + ")");
    // Deflation scan.
    int l = m;
    while (l > 0) {
      const double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
      if (std::abs(h(l, l - 1)) <= eps * std::max(s, hnorm)) {
        h(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == m) {
      m -= 1;
      iter = 0;
      continue;
    }
    if (l == m - 1) {
      detail::standardize_2x2(h, q, l);
      m -= 2;
      iter = 0;
      continue;
    }

    ++iter;
    double x, y, z;
    if (iter % 11 == 0) {
      // Exceptional shift to break symmetry-induced stalls.
      const double s = std::abs(h(m, m - 1)) + std::abs(h(m - 1, m - 2));
      const double sh = h(m, m) + 0.75 * s;
      const double tdet = sh * sh - 0.4375 * s * s;
      x = h(l, l) * h(l, l) + h(l, l + 1) * h(l + 1, l) - 2.0 * sh * h(l, l) + tdet;
      y = h(l + 1, l) * (h(l, l) + h(l + 1, l + 1) - 2.0 * sh);
      z = (l + 2 <= m) ? h(l + 1, l) * h(l + 2, l + 1) : 0.0;
    } else {
      const double tr = h(m - 1, m - 1) + h(m, m);
      const double det = h(m - 1, m - 1) * h(m, m) - h(m - 1, m) * h(m, m - 1);
      x = h(l, l) * h(l, l) + h(l, l + 1) * h(l + 1, l) - tr * h(l, l) + det;
      y = h(l + 1, l) * (h(l, l) + h(l + 1, l + 1) - tr);
      z = (l + 2 <= m) ? h(l + 1, l) * h(l + 2, l + 1) : 0.0;
    }

    for (int k = l; k <= m - 1; ++k) {
      // Householder on (x, y, z) -> e1.
      const int len = (k + 2 <= m) ? 3 : 2;
      v[0] = x;
      v[1] = y;
      v[2] = (len == 3) ? z : 0.0;
      double nrm = 0.0;
      for (int i = 0; i < len; ++i) nrm += v[i] * v[i];
      nrm = std::sqrt(nrm);
      if (nrm != 0.0) {
        const double alpha = v[0] >= 0.0 ? -nrm : nrm;
        v[0] -= alpha;
        double vn2 = 0.0;
        for (int i = 0; i < len; ++i) vn2 += v[i] * v[i];
        if (vn2 != 0.0) {
          const double beta = 2.0 / vn2;
          const int row_hi = std::min(k + len, n);
          const int col_lo = (k > l) ? k - 1 : l;
          for (int j = col_lo; j < n; ++j) {
            double dot = 0.0;
            for (int i = 0; i < len; ++i) dot += v[i] * h(k + i, j);
            dot *= beta;
            for (int i = 0; i < len; ++i) h(k + i, j) -= dot * v[i];
          }
          const int row_top = std::min(m, k + len) + 1;
          for (int i = 0; i < row_top; ++i) {
            double dot = 0.0;
            for (int j = k; j < row_hi; ++j) dot += h(i, j) * v[j - k];
            dot *= beta;
            for (int j = k; j < row_hi; ++j) h(i, j) -= dot * v[j - k];
          }
          for (int i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int j = k; j < row_hi; ++j) dot += q(i, j) * v[j - k];
            dot *= beta;
            for (int j = k; j < row_hi; ++j) q(i, j) -= dot * v[j - k];
          }
        }
      }
      x = h(k + 1, k);
      if (k + 2 <= m) y = h(k + 2, k);
      if (k + 3 <= m) z = h(k + 3, k);
    }
    // Clean the entries the bulge chase is meant to annihilate.
    for (int i = l + 2; i <= m; ++i)
      for (int j = l; j <= i - 2; ++j) h(i, j) = 0.0;
  }

  // Final pass: make sure every remaining 2x2 block is standardized.
  for (int l = 0; l + 1 < n; ++l)
    if (h(l + 1, l) != 0.0) detail::standardize_2x2(h, q, l);
  return {q, h};
}

/// Eigenvalues of a quasi-upper-triangular matrix, as (real, imag) pairs.
inline void quasi_triangular_eigenvalues(const SmallMatrix& t, std::vector<double>& re,
                                         std::vector<double>& im) {
  const int n = t.rows();
  re.clear();
  im.clear();
  int i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      const double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), d = t(i + 1, i + 1);
      const double tr = 0.5 * (a + d);
      const double disc = tr * tr - (a * d - b * c);
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        re.push_back(tr + sq);
        im.push_back(0.0);
        re.push_back(tr - sq);
        im.push_back(0.0);
      } else {
        const double sq = std::sqrt(-disc);
        re.push_back(tr);
        im.push_back(sq);
        re.push_back(tr);
        im.push_back(-sq);
      }
      i += 2;
    } else {
      re.push_back(t(i, i));
      im.push_back(0.0);
      ++i;
    }
  }
}

} // namespace tpdg
