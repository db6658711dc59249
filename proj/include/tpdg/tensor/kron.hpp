#pragma once

#include <span>
#include <vector>

#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg {

/// Sum of r d-fold Kronecker terms of small dense factors. Factor 0 is the
/// outermost (slowest index); the last factor acts on the fastest index, so a
/// flat vector indexed (i_1, ..., i_d) has i_d contiguous.
struct KroneckerSum {
  std::vector<std::vector<SmallMatrix>> terms;

  int dimension() const { return terms.empty() ? 0 : int(terms.front().size()); }
  int num_terms() const { return int(terms.size()); }

  long rows() const {
    long r = 1;
    for (const auto& f : terms.front()) r *= f.rows();
    return r;
  }
  long cols() const {
    long c = 1;
    for (const auto& f : terms.front()) c *= f.cols();
    return c;
  }

  void validate() const {
    if (terms.empty()) throw ShapeError("KroneckerSum: no terms");
    const int d = dimension();
    if (d < 1) throw ShapeError("KroneckerSum: empty term");
    for (const auto& term : terms) {
      if (int(term.size()) != d) throw ShapeError("KroneckerSum: inconsistent factor count");
      for (int k = 0; k < d; ++k) {
        if (term[k].rows() != terms.front()[k].rows() || term[k].cols() != terms.front()[k].cols())
          throw ShapeError("KroneckerSum: factor shapes differ across terms");
        if (!term[k].all_finite()) throw ShapeError("KroneckerSum: non-finite factor entry");
      }
    }
  }
};

namespace detail {

/// Contract axis `axis` of the tensor src (extents `ext`, last axis fastest)
/// with M: dst[..., i', ...] = sum_i M(i', i) src[..., i, ...].
inline void apply_axis(const SmallMatrix& m, int axis, std::span<const int> ext,
                       std::span<const double> src, std::vector<double>& dst) {
  const int d = int(ext.size());
  long outer = 1, inner = 1;
  for (int k = 0; k < axis; ++k) outer *= ext[k];
  for (int k = axis + 1; k < d; ++k) inner *= ext[k];
  const int nin = m.cols();
  const int nout = m.rows();
  dst.assign(std::size_t(outer) * nout * inner, 0.0);
  for (long o = 0; o < outer; ++o) {
    const double* s = src.data() + o * nin * inner;
    double* t = dst.data() + o * nout * inner;
    for (int i = 0; i < nout; ++i) {
      double* trow = t + long(i) * inner;
      for (int j = 0; j < nin; ++j) {
        const double mij = m(i, j);
        if (mij == 0.0) continue;
        const double* srow = s + long(j) * inner;
        for (long q = 0; q < inner; ++q) trow[q] += mij * srow[q];
      }
    }
  }
}

} // namespace detail

/// y = sum_j (A_j1 (x) ... (x) A_jd) v, one sum-factorized axis contraction
/// per factor. Never materializes the Kronecker matrices; cost per term is
/// O(p^{d+1}) for square (p+1) factors.
inline std::vector<double> kron_apply(const KroneckerSum& op, std::span<const double> v) {
  op.validate();
  if (long(v.size()) != op.cols()) throw ShapeError("kron_apply: input length mismatch");
  const int d = op.dimension();
  std::vector<double> acc(op.rows(), 0.0);
  std::vector<double> cur, nxt;
  std::vector<int> ext(d);
  for (const auto& term : op.terms) {
    cur.assign(v.begin(), v.end());
    for (int k = 0; k < d; ++k) ext[k] = term[k].cols();
    // Contract the fastest axis first.
    for (int k = d - 1; k >= 0; --k) {
      detail::apply_axis(term[k], k, ext, cur, nxt);
      ext[k] = term[k].rows();
      std::swap(cur, nxt);
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += cur[i];
  }
  return acc;
}

} // namespace tpdg
