#pragma once

// Independent reference implementations used as test oracles. Everything in
// this header deliberately avoids the library's fast paths: Kronecker
// operators are materialized entry by entry, and singular values come from a
// two-sided Jacobi eigensolver on the Gram matrix rather than from any SVD
// routine the library ships.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "tpdg/tensor/kron.hpp"
#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg::test {

/// Dense Kronecker product of two matrices.
inline tpdg::SmallMatrix kron_dense(const tpdg::SmallMatrix& a, const tpdg::SmallMatrix& b) {
  tpdg::SmallMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int r = 0; r < b.rows(); ++r)
        for (int s = 0; s < b.cols(); ++s) c(i * b.rows() + r, j * b.cols() + s) = a(i, j) * b(r, s);
  return c;
}

/// Materialize a KroneckerSum as a dense matrix.
inline tpdg::SmallMatrix materialize(const tpdg::KroneckerSum& op) {
  tpdg::SmallMatrix acc;
  bool first = true;
  for (const auto& term : op.terms) {
    tpdg::SmallMatrix m = term.front();
    for (std::size_t k = 1; k < term.size(); ++k) m = kron_dense(m, term[k]);
    if (first) {
      acc = m;
      first = false;
    } else {
      acc += m;
    }
  }
  return acc;
}

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(tpdg::SmallMatrix a) {
  const int n = a.rows();
  const double scale = std::max(a.max_abs(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= 1e-15 * scale) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= 1e-18 * scale) continue;
        const double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

/// Singular values (descending) via the eigenvalues of the smaller Gram
/// matrix. Accurate enough for truncation-error comparisons; independent of
/// the library's SVD and Lanczos code.
inline std::vector<double> singular_values_oracle(const tpdg::SmallMatrix& a) {
  const bool wide = a.cols() > a.rows();
  const tpdg::SmallMatrix at = a.transposed();
  const tpdg::SmallMatrix gram = wide ? matmul(a, at) : matmul(at, a);
  std::vector<double> eig = symmetric_eigenvalues(gram);
  for (auto& l : eig) l = l > 0.0 ? std::sqrt(l) : 0.0;
  return eig;
}

/// Frobenius distance of dense matrices.
inline double frob_dist(const tpdg::SmallMatrix& a, const tpdg::SmallMatrix& b) {
  return (a - b).frobenius_norm();
}

/// Roots of the characteristic polynomial of a symmetric matrix by bisection
/// on the Sturm sequence (eigenvalue counts from the LDL^T inertia).
inline std::vector<double> symmetric_eigenvalues_bisection(const tpdg::SmallMatrix& a, double tol = 1e-12) {
  const int n = a.rows();
  const double bound = a.inf_norm() + 1.0;
  // Count eigenvalues < x via the inertia of A - x I (Gaussian elimination
  // without pivoting, perturbing breakdowns).
  auto count_below = [&](double x) {
    tpdg::SmallMatrix m = a;
    for (int i = 0; i < n; ++i) m(i, i) -= x;
    int count = 0;
    for (int k = 0; k < n; ++k) {
      double piv = m(k, k);
      if (piv == 0.0) piv = 1e-300;
      if (piv < 0.0) ++count;
      for (int i = k + 1; i < n; ++i) {
        const double f = m(i, k) / piv;
        for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      }
    }
    return count;
  };
  std::vector<double> eig(n);
  for (int k = 0; k < n; ++k) {
    double lo = -bound, hi = bound;
    while (hi - lo > tol * bound) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(mid) > k)
        hi = mid;
      else
        lo = mid;
    }
    eig[k] = 0.5 * (lo + hi);
  }
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

} // namespace tpdg::test
