#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>

#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg {

/// Van Loan rearrangement of an (m1 m2) x (n1 n2) matrix blocked into
/// m1 x n1 blocks of size m2 x n2. Row (j*m1 + i) of the result is
/// vec(A_ij)^T with column-stacked vec, so
///   ||A - sum_k A_k (x) B_k||_F = ||Atilde - sum_k vec(A_k) vec(B_k)^T||_F.
inline SmallMatrix shuffle_dense(const SmallMatrix& a, int m1, int n1, int m2, int n2) {
  if (a.rows() != m1 * m2 || a.cols() != n1 * n2)
    throw ShapeError("shuffle_dense: matrix is not (m1*m2) x (n1*n2)");
  SmallMatrix t(m1 * n1, m2 * n2);
  for (int i = 0; i < m1; ++i)
    for (int j = 0; j < n1; ++j)
      for (int r = 0; r < m2; ++r)
        for (int c = 0; c < n2; ++c) t(j * m1 + i, c * m2 + r) = a(i * m2 + r, j * n2 + c);
  return t;
}

/// Inverse of shuffle_dense (a permutation, hence exact).
inline SmallMatrix unshuffle_dense(const SmallMatrix& t, int m1, int n1, int m2, int n2) {
  if (t.rows() != m1 * n1 || t.cols() != m2 * n2)
    throw ShapeError("unshuffle_dense: matrix is not (m1*n1) x (m2*n2)");
  SmallMatrix a(m1 * m2, n1 * n2);
  for (int i = 0; i < m1; ++i)
    for (int j = 0; j < n1; ++j)
      for (int r = 0; r < m2; ++r)
        for (int c = 0; c < n2; ++c) a(i * m2 + r, j * n2 + c) = t(j * m1 + i, c * m2 + r);
  return a;
}

/// Abstract action of a shuffled matrix and its transpose. apply maps
/// length-(m2 n2) vectors to length-(m1 n1) vectors; apply_transpose the
/// reverse.
struct ShuffledOperator {
  int m1 = 0, n1 = 0, m2 = 0, n2 = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
  std::function<void(std::span<const double>, std::span<double>)> apply_transpose;

  long rows() const { return long(m1) * n1; }
  long cols() const { return long(m2) * n2; }
};

/// Wrap an explicitly stored shuffled matrix as an operator.
inline ShuffledOperator make_dense_shuffled_operator(SmallMatrix atilde, int m1, int n1, int m2, int n2) {
  if (atilde.rows() != m1 * n1 || atilde.cols() != m2 * n2)
    throw ShapeError("make_dense_shuffled_operator: shape mismatch");
  auto shared = std::make_shared<SmallMatrix>(std::move(atilde));
  ShuffledOperator op;
  op.m1 = m1;
  op.n1 = n1;
  op.m2 = m2;
  op.n2 = n2;
  op.apply = [shared](std::span<const double> x, std::span<double> y) { matvec(*shared, x, y); };
  op.apply_transpose = [shared](std::span<const double> x, std::span<double> y) {
    matvec_transpose(*shared, x, y);
  };
  return op;
}

} // namespace tpdg
