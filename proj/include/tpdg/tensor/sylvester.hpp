#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg {

namespace detail {

/// Start indices and sizes (1 or 2) of the diagonal blocks of a
/// quasi-upper-triangular matrix.
inline std::vector<std::pair<int, int>> quasi_blocks(const SmallMatrix& t) {
  std::vector<std::pair<int, int>> blocks;
  const int n = t.rows();
  int i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      ++i;
    }
  }
  return blocks;
}

/// Gaussian elimination with partial pivoting for the tiny (<= 4x4) coupled
/// systems inside the Sylvester back-substitution.
template <int N>
inline void solve_tiny(std::array<std::array<double, N>, N>& a, std::array<double, N>& b, int n,
                       double pivot_tol, const std::string& where) {
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (std::abs(a[piv][k]) < pivot_tol)
      throw SingularError("sylvester_solve: singular diagonal pair at " + where);
    if (piv != k) {
      std::swap(a[piv], a[k]);
      std::swap(b[piv], b[k]);
    }
    const double inv = 1.0 / a[k][k];
    for (int i = k + 1; i < n; ++i) {
      const double m = a[i][k] * inv;
      if (m == 0.0) continue;
      for (int j = k; j < n; ++j) a[i][j] -= m * a[k][j];
      b[i] -= m * b[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) b[i] -= a[i][j] * b[j];
    b[i] /= a[i][i];
  }
}

} // namespace detail

/// Solve T1 X + X T2^T = B for X, with T1 (n1 x n1) and T2 (n2 x n2)
/// quasi-upper-triangular and B (n1 x n2). Flattening X row-major (second
/// index fastest) this is exactly (T1 (x) I + I (x) T2) vec(X) = vec(B) in
/// the library's Kronecker convention (first factor on the slow index).
///
/// Back-substitution runs over the diagonal blocks of T1 from the bottom;
/// each step solves a small T2-shifted quasi-triangular system column-block
/// by column-block from the right. A (near-)zero eigenvalue sum
/// lambda(T1) + lambda(T2) surfaces as a singular tiny system and throws.
inline SmallMatrix sylvester_solve(const SmallMatrix& t1, const SmallMatrix& t2, const SmallMatrix& b) {
  const int n1 = t1.rows();
  const int n2 = t2.rows();
  if (t1.cols() != n1 || t2.cols() != n2) throw ShapeError("sylvester_solve: T factors must be square");
  if (b.rows() != n1 || b.cols() != n2) throw ShapeError("sylvester_solve: B must be n1 x n2");

  const auto blocks1 = detail::quasi_blocks(t1);
  const auto blocks2 = detail::quasi_blocks(t2);
  const double scale = t1.inf_norm() + t2.inf_norm();
  const double pivot_tol = 1e-14 * std::max(scale, 1e-300);

  SmallMatrix x(n1, n2);
  for (int bi = int(blocks1.size()) - 1; bi >= 0; --bi) {
    const auto [i0, isz] = blocks1[bi];
    // R rows for this block: B minus coupling to already-solved rows below.
    SmallMatrix r(isz, n2);
    for (int a = 0; a < isz; ++a)
      for (int k = 0; k < n2; ++k) {
        double s = b(i0 + a, k);
        for (int j = i0 + isz; j < n1; ++j) s -= t1(i0 + a, j) * x(j, k);
        r(a, k) = s;
      }
    for (int bj = int(blocks2.size()) - 1; bj >= 0; --bj) {
      const auto [k0, ksz] = blocks2[bj];
      // Couple in the already-solved columns to the right.
      for (int a = 0; a < isz; ++a)
        for (int kb = 0; kb < ksz; ++kb) {
          double s = r(a, k0 + kb);
          for (int l = k0 + ksz; l < n2; ++l) s -= t2(k0 + kb, l) * x(i0 + a, l);
          r(a, k0 + kb) = s;
        }
      const int nsys = isz * ksz;
      const std::string where = "T1 block " + std::to_string(i0) + ", T2 block " + std::to_string(k0);
      std::array<std::array<double, 4>, 4> m{};
      std::array<double, 4> rhs{};
      // Unknown ordering: (a, kb) -> a * ksz + kb.
      for (int a = 0; a < isz; ++a)
        for (int kb = 0; kb < ksz; ++kb) {
          const int row = a * ksz + kb;
          rhs[row] = r(a, k0 + kb);
          for (int a2 = 0; a2 < isz; ++a2)
            for (int kb2 = 0; kb2 < ksz; ++kb2) {
              const int col = a2 * ksz + kb2;
              double coef = 0.0;
              if (kb == kb2) coef += t1(i0 + a, i0 + a2);
              if (a == a2) coef += t2(k0 + kb, k0 + kb2);
              m[row][col] = coef;
            }
        }
      detail::solve_tiny<4>(m, rhs, nsys, pivot_tol, where);
      for (int a = 0; a < isz; ++a)
        for (int kb = 0; kb < ksz; ++kb) x(i0 + a, k0 + kb) = rhs[a * ksz + kb];
    }
  }
  return x;
}

} // namespace tpdg
