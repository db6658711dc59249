#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpdg/ops/shuffled.hpp"
#include "tpdg/precond/block_jacobi.hpp"
#include "tpdg/tensor/lanczos.hpp"
#include "tpdg/tensor/schur.hpp"
#include "tpdg/tensor/sylvester.hpp"

namespace tpdg {

struct KsvdConfig {
  int terms = 2;                  // r for the 2D factorization / 3D second stage
  LanczosConfig lanczos;          // per-element iteration settings
  double degenerate_tol = 1e-12;  // sigma_2/sigma_1 below this collapses term 2
};

/// An element that could not be factorized in Kronecker form and fell back
/// to an exact block solve.
struct FallbackEvent {
  int element = 0;
  int component = -1; // small mode only
  std::string reason;
};

namespace ksvd_detail {

/// Factorized two-term 2D form ready for the Sylvester-based solve:
/// P = A1 (x) B1 + A2 (x) B2, T1 = schur(A2^{-1} A1), T2 = schur(B1^{-1} B2).
struct Factors2D {
  SmallMatrix a1, b1, a2, b2;
  LuFactor lu_a2, lu_b1;
  SchurPair s1, s2;
};

/// Factorized 3D form P = A1 (x) B1 (x) C1 + A1 (x) B2 (x) C2 with shared
/// leading factor; T1 = schur(B2^{-1} B1), T2 = schur(C1^{-1} C2).
struct Factors3D {
  SmallMatrix a1, b1, c1, b2, c2;
  LuFactor lu_a1, lu_b2, lu_c1;
  SchurPair s1, s2;
};

inline SmallMatrix lu_solve_matrix(const LuFactor& lu, const SmallMatrix& rhs) {
  SmallMatrix x(rhs.rows(), rhs.cols());
  std::vector<double> col(rhs.rows()), sol(rhs.rows());
  for (int j = 0; j < rhs.cols(); ++j) {
    for (int i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, j);
    lu.solve(col, sol);
    for (int i = 0; i < rhs.rows(); ++i) x(i, j) = sol[i];
  }
  return x;
}

/// The Sylvester solve is unusable when an eigenvalue of T1 cancels one of
/// T2; detect that at formation time so the element can fall back.
inline void check_sylvester_pair(const SchurPair& s1, const SchurPair& s2) {
  std::vector<double> re1, im1, re2, im2;
  quasi_triangular_eigenvalues(s1.t, re1, im1);
  quasi_triangular_eigenvalues(s2.t, re2, im2);
  const double scale = s1.t.inf_norm() + s2.t.inf_norm();
  for (std::size_t i = 0; i < re1.size(); ++i)
    for (std::size_t j = 0; j < re2.size(); ++j) {
      const double re = re1[i] + re2[j];
      const double im = im1[i] + im2[j];
      if (std::sqrt(re * re + im * im) < 1e-12 * std::max(scale, 1e-300))
        throw SingularError("ksvd: singular Sylvester eigenvalue pair");
    }
}

inline Factors2D make_factors_2d(SmallMatrix a1, SmallMatrix b1, SmallMatrix a2, SmallMatrix b2) {
  Factors2D f;
  f.lu_a2 = LuFactor(a2);
  f.lu_b1 = LuFactor(b1);
  const SmallMatrix c1 = lu_solve_matrix(f.lu_a2, a1);
  const SmallMatrix c2 = lu_solve_matrix(f.lu_b1, b2);
  f.s1 = real_schur(c1);
  f.s2 = real_schur(c2);
  check_sylvester_pair(f.s1, f.s2);
  f.a1 = std::move(a1);
  f.b1 = std::move(b1);
  f.a2 = std::move(a2);
  f.b2 = std::move(b2);
  return f;
}

inline Factors3D make_factors_3d(SmallMatrix a1, SmallMatrix b1, SmallMatrix c1, SmallMatrix b2,
                                 SmallMatrix c2) {
  Factors3D f;
  f.lu_a1 = LuFactor(a1);
  f.lu_b2 = LuFactor(b2);
  f.lu_c1 = LuFactor(c1);
  const SmallMatrix g1 = lu_solve_matrix(f.lu_b2, b1);
  const SmallMatrix g2 = lu_solve_matrix(f.lu_c1, c2);
  f.s1 = real_schur(g1);
  f.s2 = real_schur(g2);
  check_sylvester_pair(f.s1, f.s2);
  f.a1 = std::move(a1);
  f.b1 = std::move(b1);
  f.c1 = std::move(c1);
  f.b2 = std::move(b2);
  f.c2 = std::move(c2);
  return f;
}

/// Solve (A1 (x) B1 + A2 (x) B2) x = rhs in place (rhs viewed as an
/// n_outer x n_inner row-major matrix).
inline void apply_factors_2d(const Factors2D& f, std::span<double> x, std::vector<double>& fiber,
                             std::vector<double>& sol) {
  const int n1 = f.a1.rows();
  const int n2 = f.b1.rows();
  int ext[2] = {n2, n1}; // first axis fastest: inner index first
  // (A2^{-1} (x) B1^{-1}) rhs
  kernels::axis_solve(f.lu_a2, 2, ext, 1, x.data(), fiber, sol);
  kernels::axis_solve(f.lu_b1, 2, ext, 0, x.data(), fiber, sol);
  // Rotate to Schur coordinates: (Q1^T (x) Q2^T).
  SmallMatrix m(n1, n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) m(i, j) = x[std::size_t(i) * n2 + j];
  m = matmul(matmul(f.s1.q.transposed(), m), f.s2.q);
  const SmallMatrix y = sylvester_solve(f.s1.t, f.s2.t, m);
  const SmallMatrix back = matmul(matmul(f.s1.q, y), f.s2.q.transposed());
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) x[std::size_t(i) * n2 + j] = back(i, j);
}

/// Solve (A1 (x) B1 (x) C1 + A1 (x) B2 (x) C2) x = rhs in place.
inline void apply_factors_3d(const Factors3D& f, std::span<double> x, std::vector<double>& fiber,
                             std::vector<double>& sol) {
  const int n1 = f.a1.rows(); // outer
  const int nb = f.b1.rows(); // middle
  const int ncc = f.c1.rows(); // inner
  int ext[3] = {ncc, nb, n1};
  kernels::axis_solve(f.lu_a1, 3, ext, 2, x.data(), fiber, sol);
  kernels::axis_solve(f.lu_b2, 3, ext, 1, x.data(), fiber, sol);
  kernels::axis_solve(f.lu_c1, 3, ext, 0, x.data(), fiber, sol);
  // Per outer slice: rotate, Sylvester in (middle, inner), rotate back.
  SmallMatrix m(nb, ncc);
  for (int s = 0; s < n1; ++s) {
    double* slice = x.data() + std::size_t(s) * nb * ncc;
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < ncc; ++j) m(i, j) = slice[std::size_t(i) * ncc + j];
    SmallMatrix rot = matmul(matmul(f.s1.q.transposed(), m), f.s2.q);
    const SmallMatrix y = sylvester_solve(f.s1.t, f.s2.t, rot);
    const SmallMatrix back = matmul(matmul(f.s1.q, y), f.s2.q.transposed());
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < ncc; ++j) slice[std::size_t(i) * ncc + j] = back(i, j);
  }
}

} // namespace ksvd_detail

/// Two-term approximate Kronecker-product preconditioner in 2D, one
/// factorization per element (full mode) or per element and component
/// (small mode). Elements whose factors are singular fall back to an exact
/// block LU; the events are recorded.
class KsvdPC2D {
public:
  BlockMode mode = BlockMode::full;
  int n_elements = 0;
  int n_c = 0;
  int npe = 0;
  int n1d = 0;
  std::vector<std::optional<ksvd_detail::Factors2D>> factors; // [e] or [e * n_c + c]
  std::vector<LuFactor> fallback_lus;                         // parallel to factors
  std::vector<FallbackEvent> fallbacks;

  void apply(std::span<const double> in, std::span<double> out) const {
    const int block = n_c * npe;
    std::vector<double> fiber, sol;
    for (int e = 0; e < n_elements; ++e) {
      if (mode == BlockMode::full) {
        std::copy_n(in.data() + std::size_t(e) * block, block, out.data() + std::size_t(e) * block);
        if (factors[e])
          ksvd_detail::apply_factors_2d(*factors[e], out.subspan(std::size_t(e) * block, block), fiber,
                                        sol);
        else
          fallback_lus[e].solve_inplace(out.subspan(std::size_t(e) * block, block));
      } else {
        for (int c = 0; c < n_c; ++c) {
          const std::size_t off = std::size_t(e) * block + std::size_t(c) * npe;
          std::copy_n(in.data() + off, npe, out.data() + off);
          const std::size_t idx = std::size_t(e) * n_c + c;
          if (factors[idx])
            ksvd_detail::apply_factors_2d(*factors[idx], out.subspan(off, npe), fiber, sol);
          else
            fallback_lus[idx].solve_inplace(out.subspan(off, npe));
        }
      }
    }
  }
};

/// Same shape for 3D with the shared-leading-factor form.
class KsvdPC3D {
public:
  BlockMode mode = BlockMode::full;
  int n_elements = 0;
  int n_c = 0;
  int npe = 0;
  int n1d = 0;
  std::vector<std::optional<ksvd_detail::Factors3D>> factors;
  std::vector<LuFactor> fallback_lus;
  std::vector<FallbackEvent> fallbacks;

  void apply(std::span<const double> in, std::span<double> out) const {
    const int block = n_c * npe;
    std::vector<double> fiber, sol;
    for (int e = 0; e < n_elements; ++e) {
      if (mode == BlockMode::full) {
        std::copy_n(in.data() + std::size_t(e) * block, block, out.data() + std::size_t(e) * block);
        if (factors[e])
          ksvd_detail::apply_factors_3d(*factors[e], out.subspan(std::size_t(e) * block, block), fiber,
                                        sol);
        else
          fallback_lus[e].solve_inplace(out.subspan(std::size_t(e) * block, block));
      } else {
        for (int c = 0; c < n_c; ++c) {
          const std::size_t off = std::size_t(e) * block + std::size_t(c) * npe;
          std::copy_n(in.data() + off, npe, out.data() + off);
          const std::size_t idx = std::size_t(e) * n_c + c;
          if (factors[idx])
            ksvd_detail::apply_factors_3d(*factors[idx], out.subspan(off, npe), fiber, sol);
          else
            fallback_lus[idx].solve_inplace(out.subspan(off, npe));
        }
      }
    }
  }
};

namespace ksvd_detail {

inline LanczosConfig block_lanczos_config(const KsvdConfig& cfg, int terms) {
  LanczosConfig lc = cfg.lanczos;
  lc.requested_terms = terms;
  if (cfg.lanczos.max_iterations == 0) lc.max_iterations = 2 * terms + 20;
  return lc;
}

} // namespace ksvd_detail

/// Algorithm: run the Lanczos KSVD (r = 2) on the matrix-free shuffled
/// products of each diagonal block, then factor A2, B1 and the Schur pairs
/// of A2^{-1} A1 and B1^{-1} B2. A vanishing second singular value collapses
/// the second term to I (x) 0, keeping the solve path valid for exactly
/// separable blocks.
inline KsvdPC2D form_ksvd_2d(const LinearizedOperator& lin, BlockMode mode = BlockMode::full,
                             const KsvdConfig& cfg = {}) {
  lin.check_cache();
  const Discretization& sys = *lin.sys;
  if (sys.dim != 2) throw ConfigError("form_ksvd_2d: mesh is not 2D");
  KsvdPC2D pc;
  pc.mode = mode;
  pc.n_elements = sys.mesh.n_elements;
  pc.n_c = sys.n_c;
  pc.npe = sys.npe;
  pc.n1d = sys.n1d;
  const int blocks_per_elem = mode == BlockMode::full ? 1 : sys.n_c;
  pc.factors.resize(std::size_t(pc.n_elements) * blocks_per_elem);
  pc.fallback_lus.resize(std::size_t(pc.n_elements) * blocks_per_elem);
  std::vector<std::vector<FallbackEvent>> events(pc.n_elements);

  parallel_for(pc.n_elements, [&](int e) {
    for (int blk = 0; blk < blocks_per_elem; ++blk) {
      const int comp = mode == BlockMode::full ? -1 : blk;
      const std::size_t idx = std::size_t(e) * blocks_per_elem + blk;
      try {
        const auto op = make_element_shuffled_operator(lin, e, mode, std::max(comp, 0));
        const auto res = lanczos_ksvd(op, ksvd_detail::block_lanczos_config(cfg, cfg.terms));
        SmallMatrix a1 = res.factors.terms[0][0];
        SmallMatrix b1 = res.factors.terms[0][1];
        SmallMatrix a2 = res.factors.terms.size() > 1 ? res.factors.terms[1][0] : SmallMatrix(op.m1, op.n1);
        SmallMatrix b2 = res.factors.terms.size() > 1 ? res.factors.terms[1][1] : SmallMatrix(op.m2, op.n2);
        if (res.singular_values.size() < 2 ||
            res.singular_values[1] <= cfg.degenerate_tol * res.singular_values[0]) {
          a2 = SmallMatrix::identity(op.m1);
          b2 = SmallMatrix(op.m2, op.n2);
        }
        try {
          pc.factors[idx] = ksvd_detail::make_factors_2d(a1, b1, a2, b2);
        } catch (const SingularError&) {
          // The algorithm only inverts A2 and B1; relabeling the two terms
          // swaps the inverted pair, which often rescues blocks whose
          // convective factor is structurally singular.
          pc.factors[idx] = ksvd_detail::make_factors_2d(a2, b2, a1, b1);
        }
      } catch (const SingularError& err) {
        // Exact block solve for this element; recorded, not silent.
        if (mode == BlockMode::full) {
          pc.fallback_lus[idx] = LuFactor(assemble_diag_block(lin, e));
        } else {
          pc.fallback_lus[idx] = LuFactor(assemble_diag_block_small(lin, e)[blk]);
        }
        events[e].push_back({e, comp, err.what()});
      }
    }
  });
  for (auto& ev : events)
    for (auto& f : ev) pc.fallbacks.push_back(std::move(f));
  return pc;
}

/// Algorithm: stage 1 finds the dominant A1 (x) D1 split from the 3D
/// matrix-free shuffled products (r = 1); stage 2 runs the two-term KSVD on
/// the explicitly shuffled D1 (dense products, the factor is only
/// (p+1)^2 x (p+1)^2); then LU and Schur factorizations as in 2D.
inline KsvdPC3D form_ksvd_3d(const LinearizedOperator& lin, BlockMode mode = BlockMode::full,
                             const KsvdConfig& cfg = {}) {
  lin.check_cache();
  const Discretization& sys = *lin.sys;
  if (sys.dim != 3) throw ConfigError("form_ksvd_3d: mesh is not 3D");
  KsvdPC3D pc;
  pc.mode = mode;
  pc.n_elements = sys.mesh.n_elements;
  pc.n_c = sys.n_c;
  pc.npe = sys.npe;
  pc.n1d = sys.n1d;
  const int q = sys.n1d;
  const int blocks_per_elem = mode == BlockMode::full ? 1 : sys.n_c;
  pc.factors.resize(std::size_t(pc.n_elements) * blocks_per_elem);
  pc.fallback_lus.resize(std::size_t(pc.n_elements) * blocks_per_elem);
  std::vector<std::vector<FallbackEvent>> events(pc.n_elements);

  parallel_for(pc.n_elements, [&](int e) {
    for (int blk = 0; blk < blocks_per_elem; ++blk) {
      const int comp = mode == BlockMode::full ? -1 : blk;
      const std::size_t idx = std::size_t(e) * blocks_per_elem + blk;
      try {
        // Stage 1: A ~ A1 (x) D1.
        const auto op = make_element_shuffled_operator(lin, e, mode, std::max(comp, 0));
        const auto stage1 = lanczos_ksvd(op, ksvd_detail::block_lanczos_config(cfg, 1));
        if (stage1.singular_values.empty() || stage1.singular_values[0] <= 0.0)
          throw SingularError("ksvd 3d: zero leading singular value");
        SmallMatrix a1 = stage1.factors.terms[0][0];
        const SmallMatrix& d1 = stage1.factors.terms[0][1]; // q^2 x q^2
        // Stage 2: D1 ~ B1 (x) C1 + B2 (x) C2 via dense shuffled products.
        const auto op2 = make_dense_shuffled_operator(shuffle_dense(d1, q, q, q, q), q, q, q, q);
        const auto stage2 = lanczos_ksvd(op2, ksvd_detail::block_lanczos_config(cfg, cfg.terms));
        SmallMatrix b1 = stage2.factors.terms[0][0];
        SmallMatrix c1 = stage2.factors.terms[0][1];
        SmallMatrix b2 = stage2.factors.terms.size() > 1 ? stage2.factors.terms[1][0] : SmallMatrix(q, q);
        SmallMatrix c2 = stage2.factors.terms.size() > 1 ? stage2.factors.terms[1][1] : SmallMatrix(q, q);
        if (stage2.singular_values.size() < 2 ||
            stage2.singular_values[1] <= cfg.degenerate_tol * stage2.singular_values[0]) {
          b2 = SmallMatrix::identity(q);
          c2 = SmallMatrix(q, q);
        }
        try {
          pc.factors[idx] = ksvd_detail::make_factors_3d(a1, b1, c1, b2, c2);
        } catch (const SingularError&) {
          // Same inverted-pair freedom as in 2D, applied to the second stage.
          pc.factors[idx] = ksvd_detail::make_factors_3d(a1, b2, c2, b1, c1);
        }
      } catch (const SingularError& err) {
        if (mode == BlockMode::full) {
          pc.fallback_lus[idx] = LuFactor(assemble_diag_block(lin, e));
        } else {
          pc.fallback_lus[idx] = LuFactor(assemble_diag_block_small(lin, e)[blk]);
        }
        events[e].push_back({e, comp, err.what()});
      }
    }
  });
  for (auto& ev : events)
    for (auto& f : ev) pc.fallbacks.push_back(std::move(f));
  return pc;
}

/// Solve P x = b for one already-formed 2D factorization (Algorithm: apply
/// (A2^{-1} (x) B1^{-1}), Sylvester solve in Schur coordinates, rotate back).
inline std::vector<double> apply_ksvd_2d(const ksvd_detail::Factors2D& f, std::span<const double> b) {
  std::vector<double> x(b.begin(), b.end());
  std::vector<double> fiber, sol;
  ksvd_detail::apply_factors_2d(f, x, fiber, sol);
  return x;
}

inline std::vector<double> apply_ksvd_3d(const ksvd_detail::Factors3D& f, std::span<const double> b) {
  std::vector<double> x(b.begin(), b.end());
  std::vector<double> fiber, sol;
  ksvd_detail::apply_factors_3d(f, x, fiber, sol);
  return x;
}

} // namespace tpdg
