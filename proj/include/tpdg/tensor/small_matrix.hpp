#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tpdg/common/error.hpp"

namespace tpdg {

/// Dense row-major matrix for the small per-element factors (sizes are a few
/// dozen at most). Not a BLAS replacement; just what the tensor kernels need.
class SmallMatrix {
public:
  SmallMatrix() = default;
  SmallMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0.0) {
    if (rows < 1 || cols < 1) throw ShapeError("SmallMatrix: dimensions must be positive");
  }

  static SmallMatrix identity(int n) {
    SmallMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }
  std::size_t size() const { return a_.size(); }

  SmallMatrix transposed() const {
    SmallMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Max absolute row sum.
  double inf_norm() const {
    double m = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

  bool all_finite() const {
    for (double v : a_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  SmallMatrix& operator+=(const SmallMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  SmallMatrix& operator-=(const SmallMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  SmallMatrix& operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
  }

private:
  void require_same_shape(const SmallMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("SmallMatrix: shape mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

inline SmallMatrix operator+(SmallMatrix a, const SmallMatrix& b) { return a += b; }
inline SmallMatrix operator-(SmallMatrix a, const SmallMatrix& b) { return a -= b; }
inline SmallMatrix operator*(double s, SmallMatrix a) { return a *= s; }

inline SmallMatrix matmul(const SmallMatrix& a, const SmallMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  SmallMatrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// y = A x.
inline void matvec(const SmallMatrix& a, std::span<const double> x, std::span<double> y) {
  if (int(x.size()) != a.cols() || int(y.size()) != a.rows())
    throw ShapeError("matvec: vector length mismatch");
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
}

/// y = A^T x.
inline void matvec_transpose(const SmallMatrix& a, std::span<const double> x, std::span<double> y) {
  if (int(x.size()) != a.rows() || int(y.size()) != a.cols())
    throw ShapeError("matvec_transpose: vector length mismatch");
  for (int j = 0; j < a.cols(); ++j) y[j] = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    for (int j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
  }
}

/// LU factorization with partial pivoting. Rejects pivots below
/// 1e-14 * ||A||_inf as singular.
class LuFactor {
public:
  LuFactor() = default;

  explicit LuFactor(const SmallMatrix& a) : lu_(a), perm_(a.rows()) {
    if (a.rows() != a.cols()) throw ShapeError("LuFactor: matrix must be square");
    const int n = a.rows();
    const double tol = 1e-14 * std::max(a.inf_norm(), 1e-300);
    for (int i = 0; i < n; ++i) perm_[i] = i;
    for (int k = 0; k < n; ++k) {
      int piv = k;
      double best = std::abs(lu_(k, k));
      for (int i = k + 1; i < n; ++i) {
        const double v = std::abs(lu_(i, k));
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < tol)
        throw SingularError("LuFactor: pivot " + std::to_string(best) + " below tolerance at column " +
                            std::to_string(k));
      if (piv != k) {
        for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      const double inv = 1.0 / lu_(k, k);
      for (int i = k + 1; i < n; ++i) {
        const double m = lu_(i, k) * inv;
        lu_(i, k) = m;
        for (int j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
      }
    }
  }

  int order() const { return lu_.rows(); }

  /// x = A^{-1} b.
  void solve(std::span<const double> b, std::span<double> x) const {
    const int n = order();
    if (int(b.size()) != n || int(x.size()) != n) throw ShapeError("LuFactor::solve: length mismatch");
    for (int i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
  }

  void solve_inplace(std::span<double> bx) const {
    std::vector<double> tmp(bx.begin(), bx.end());
    solve(tmp, bx);
  }

  /// x = A^{-T} b.
  void solve_transpose(std::span<const double> b, std::span<double> x) const {
    const int n = order();
    if (int(b.size()) != n || int(x.size()) != n) throw ShapeError("LuFactor::solve_transpose: length mismatch");
    std::vector<double> y(b.begin(), b.end());
    // U^T forward solve, then L^T backward solve, then undo row permutation.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) y[i] -= lu_(j, i) * y[j];
      y[i] /= lu_(i, i);
    }
    for (int i = n - 1; i >= 0; --i)
      for (int j = i + 1; j < n; ++j) y[i] -= lu_(j, i) * y[j];
    for (int i = 0; i < n; ++i) x[perm_[i]] = y[i];
  }

private:
  SmallMatrix lu_;
  std::vector<int> perm_;
};

} // namespace tpdg
