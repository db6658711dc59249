#pragma once

#include <vector>

#include "tpdg/ops/discretization.hpp"

namespace tpdg {

enum class BlockMode { full, small };

/// Pre-computed linearization data (Algorithm-style split between
/// pre-computation and application): contravariant volume flux Jacobians and
/// both trace derivatives of the numerical flux at every quadrature point.
/// Content-hashed against the state it was built from.
struct LinearizationCache {
  std::uint64_t hash = 0;
  double time = 0.0;
  int n_c = 0;
  // [e][dir][q][r][c]
  std::vector<double> dft;
  // [e][f][q][r][c]
  std::vector<double> dfm, dfp;

  const double* dft_at(const Discretization& sys, int e, int dir) const {
    return dft.data() + ((std::size_t(e) * sys.dim + dir) * sys.nqv) * n_c * n_c;
  }
  const double* dfm_at(const Discretization& sys, int e, int f) const {
    return dfm.data() + ((std::size_t(e) * 2 * sys.dim + f) * sys.nqf) * n_c * n_c;
  }
  const double* dfp_at(const Discretization& sys, int e, int f) const {
    return dfp.data() + ((std::size_t(e) * 2 * sys.dim + f) * sys.nqf) * n_c * n_c;
  }
};

/// Evaluate the flux Jacobians at all quadrature points of the linearization
/// state u. Boundary faces fold the (fixed) exterior trace into dfm and leave
/// dfp zero.
inline LinearizationCache build_cache(const Discretization& sys, const StateVector& u, double t = 0.0) {
  if (!u.all_finite()) throw StateError("build_cache: non-finite coefficient in the state");
  LinearizationCache cache;
  cache.hash = state_hash(u);
  cache.time = t;
  cache.n_c = sys.n_c;
  const int nc = sys.n_c, nqv = sys.nqv, nqf = sys.nqf, d = sys.dim;
  const int nel = sys.mesh.n_elements;
  cache.dft.assign(std::size_t(nel) * d * nqv * nc * nc, 0.0);
  cache.dfm.assign(std::size_t(nel) * 2 * d * nqf * nc * nc, 0.0);
  cache.dfp.assign(std::size_t(nel) * 2 * d * nqf * nc * nc, 0.0);

  parallel_for(nel, [&](int e) {
    kernels::Scratch ws;
    std::vector<double> vals(std::size_t(nc) * nqv), uq(nc), df(std::size_t(d) * nc * nc);
    for (int c = 0; c < nc; ++c)
      kernels::eval_at_quad(sys.ref.g, d, u.component(e, c), vals.data() + std::size_t(c) * nqv, ws);
    const double* adj = sys.mesh.adj_at(e);
    const double* xv = sys.mesh.vol_x_at(e);
    double* dft_e = cache.dft.data() + (std::size_t(e) * d * nqv) * nc * nc;
    for (int q = 0; q < nqv; ++q) {
      for (int c = 0; c < nc; ++c) uq[c] = vals[std::size_t(c) * nqv + q];
      sys.law.flux_jacobian(uq.data(), xv + std::size_t(q) * d, df.data());
      const double* a = adj + std::size_t(q) * d * d;
      for (int k = 0; k < d; ++k)
        for (int r = 0; r < nc; ++r)
          for (int c = 0; c < nc; ++c) {
            double s = 0.0;
            for (int m = 0; m < d; ++m) s += a[k * d + m] * df[(std::size_t(m) * nc + r) * nc + c];
            dft_e[(std::size_t(k) * nqv + q) * nc * nc + r * nc + c] = s;
          }
    }

    std::vector<double> tm(std::size_t(nc) * nqf), tp(std::size_t(nc) * nqf), um(nc), up(nc);
    for (int f = 0; f < 2 * d; ++f) {
      const auto& fc = sys.mesh.faces[e][f];
      for (int c = 0; c < nc; ++c)
        kernels::face_trace(sys, f, u.component(e, c), tm.data() + std::size_t(c) * nqf, ws);
      const double* fx = sys.mesh.face_x_at(e, f);
      const double* fn = sys.mesh.face_n_at(e, f);
      const bool interior = fc.neighbor >= 0;
      if (interior) {
        for (int c = 0; c < nc; ++c)
          kernels::neighbor_trace(sys, e, f, u, c, tp.data() + std::size_t(c) * nqf, ws);
      }
      double* dfm_e = cache.dfm.data() + ((std::size_t(e) * 2 * d + f) * nqf) * nc * nc;
      double* dfp_e = cache.dfp.data() + ((std::size_t(e) * 2 * d + f) * nqf) * nc * nc;
      for (int q = 0; q < nqf; ++q) {
        for (int c = 0; c < nc; ++c) um[c] = tm[std::size_t(c) * nqf + q];
        if (interior)
          for (int c = 0; c < nc; ++c) up[c] = tp[std::size_t(c) * nqf + q];
        else
          sys.law.boundary_state(fx + std::size_t(q) * d, t, um.data(), up.data());
        sys.law.num_flux_jac_minus(um.data(), up.data(), fn + std::size_t(q) * d, fx + std::size_t(q) * d,
                                   dfm_e + std::size_t(q) * nc * nc);
        if (interior)
          sys.law.num_flux_jac_plus(um.data(), up.data(), fn + std::size_t(q) * d, fx + std::size_t(q) * d,
                                    dfp_e + std::size_t(q) * nc * nc);
      }
    }
  });
  return cache;
}

namespace kernels {

/// out += a * (M v)_e + b * (J v)_e restricted to the element's own block
/// (volume term plus the u^- face derivative). Small mode drops
/// cross-component coupling.
inline void element_diag_apply(const Discretization& sys, const LinearizationCache& cache, int e,
                               double a, double b, BlockMode mode, const double* vin, double* vout,
                               Scratch& ws) {
  const int nc = sys.n_c, nqv = sys.nqv, nqf = sys.nqf, d = sys.dim, npe = sys.npe;
  std::vector<double> vals(std::size_t(nc) * nqv);
  for (int c = 0; c < nc; ++c)
    eval_at_quad(sys.ref.g, d, vin + std::size_t(c) * npe, vals.data() + std::size_t(c) * nqv, ws);

  std::vector<double> field(nqv);
  const double* jd = sys.mesh.jdet_at(e);
  if (a != 0.0) {
    for (int c = 0; c < nc; ++c) {
      for (int q = 0; q < nqv; ++q) field[q] = a * jd[q] * vals[std::size_t(c) * nqv + q];
      integrate_back(sys.ref.gw, sys.ref.dw, d, -1, field.data(), vout + std::size_t(c) * npe, ws);
    }
  }
  if (b == 0.0) return;

  for (int dir = 0; dir < d; ++dir) {
    const double* dft = cache.dft_at(sys, e, dir);
    for (int r = 0; r < nc; ++r) {
      for (int q = 0; q < nqv; ++q) {
        double s = 0.0;
        if (mode == BlockMode::full) {
          for (int c = 0; c < nc; ++c)
            s += dft[std::size_t(q) * nc * nc + r * nc + c] * vals[std::size_t(c) * nqv + q];
        } else {
          s = dft[std::size_t(q) * nc * nc + r * nc + r] * vals[std::size_t(r) * nqv + q];
        }
        field[q] = b * s;
      }
      integrate_back(sys.ref.gw, sys.ref.dw, d, dir, field.data(), vout + std::size_t(r) * npe, ws);
    }
  }

  std::vector<double> tm(std::size_t(nc) * nqf), g(nqf);
  for (int f = 0; f < 2 * d; ++f) {
    for (int c = 0; c < nc; ++c)
      face_trace(sys, f, vin + std::size_t(c) * npe, tm.data() + std::size_t(c) * nqf, ws);
    const double* dfm = cache.dfm_at(sys, e, f);
    const double* fw = sys.mesh.face_w_at(e, f);
    for (int r = 0; r < nc; ++r) {
      for (int q = 0; q < nqf; ++q) {
        double s = 0.0;
        if (mode == BlockMode::full) {
          for (int c = 0; c < nc; ++c)
            s += dfm[std::size_t(q) * nc * nc + r * nc + c] * tm[std::size_t(c) * nqf + q];
        } else {
          s = dfm[std::size_t(q) * nc * nc + r * nc + r] * tm[std::size_t(r) * nqf + q];
        }
        g[q] = -b * fw[q] * s;
      }
      face_lift(sys, f, g.data(), vout + std::size_t(r) * npe, ws);
    }
  }
}

} // namespace kernels

/// Linear action (M - dt J) or J alone at a frozen linearization state.
struct LinearizedOperator {
  enum class Mode { mass_minus_dt_jacobian, jacobian_only };

  const Discretization* sys = nullptr;
  const LinearizationCache* cache = nullptr;
  double dt = 0.0;
  Mode mode = Mode::mass_minus_dt_jacobian;
  BlockMode block_mode = BlockMode::full;
  std::uint64_t expected_hash = 0;

  double mass_coeff() const { return mode == Mode::mass_minus_dt_jacobian ? 1.0 : 0.0; }
  double jac_coeff() const { return mode == Mode::mass_minus_dt_jacobian ? -dt : 1.0; }

  void check_cache() const {
    if (!sys || !cache) throw ConfigError("LinearizedOperator: not bound");
    if (cache->hash != expected_hash)
      throw ConfigError("LinearizedOperator: stale linearization cache (state hash mismatch)");
  }
};

inline LinearizedOperator make_linearized_operator(
    const Discretization& sys, const LinearizationCache& cache, double dt,
    LinearizedOperator::Mode mode = LinearizedOperator::Mode::mass_minus_dt_jacobian) {
  LinearizedOperator lin;
  lin.sys = &sys;
  lin.cache = &cache;
  lin.dt = dt;
  lin.mode = mode;
  lin.expected_hash = cache.hash;
  return lin;
}

/// Matrix-free action of the linearized operator on a global state, including
/// the neighbor-coupling face terms through the u^+ trace derivative.
inline StateVector jacobian_apply(const LinearizedOperator& lin, const StateVector& v) {
  lin.check_cache();
  const Discretization& sys = *lin.sys;
  const LinearizationCache& cache = *lin.cache;
  if (!v.same_shape(StateVector(sys.mesh.n_elements, sys.n_c, sys.npe)))
    throw ShapeError("jacobian_apply: state shape mismatch");
  StateVector out = sys.make_state();
  const double a = lin.mass_coeff();
  const double b = lin.jac_coeff();
  const int nc = sys.n_c, nqf = sys.nqf;

  parallel_for(sys.mesh.n_elements, [&](int e) {
    kernels::Scratch ws;
    kernels::element_diag_apply(sys, cache, e, a, b, lin.block_mode, v.element(e), out.element(e), ws);
    // Off-diagonal (neighbor) face coupling.
    std::vector<double> tp(std::size_t(nc) * nqf), g(nqf);
    for (int f = 0; f < 2 * sys.dim; ++f) {
      const auto& fc = sys.mesh.faces[e][f];
      if (fc.neighbor < 0) continue;
      for (int c = 0; c < nc; ++c)
        kernels::neighbor_trace(sys, e, f, v, c, tp.data() + std::size_t(c) * nqf, ws);
      const double* dfp = cache.dfp_at(sys, e, f);
      const double* fw = sys.mesh.face_w_at(e, f);
      for (int r = 0; r < nc; ++r) {
        for (int q = 0; q < nqf; ++q) {
          double s = 0.0;
          if (lin.block_mode == BlockMode::full) {
            for (int c = 0; c < nc; ++c)
              s += dfp[std::size_t(q) * nc * nc + r * nc + c] * tp[std::size_t(c) * nqf + q];
          } else {
            s = dfp[std::size_t(q) * nc * nc + r * nc + r] * tp[std::size_t(r) * nqf + q];
          }
          g[q] = -b * fw[q] * s;
        }
        kernels::face_lift(sys, f, g.data(), out.component(e, r), ws);
      }
    }
  });
  return out;
}

/// Dense diagonal block of the linearized operator for one element, assembled
/// by probing the sum-factorized element kernel with unit vectors. Refuses
/// blocks above the entry budget.
inline SmallMatrix assemble_diag_block(const LinearizedOperator& lin, int e,
                                       long max_entries = 100'000'000) {
  lin.check_cache();
  const Discretization& sys = *lin.sys;
  const int n = sys.n_c * sys.npe;
  if (long(n) * n > max_entries)
    throw ConfigError("assemble_diag_block: block of " + std::to_string(long(n) * n) +
                      " entries exceeds the budget");
  SmallMatrix block(n, n);
  kernels::Scratch ws;
  std::vector<double> vin(n, 0.0), vout(n);
  for (int j = 0; j < n; ++j) {
    vin[j] = 1.0;
    std::fill(vout.begin(), vout.end(), 0.0);
    kernels::element_diag_apply(sys, *lin.cache, e, lin.mass_coeff(), lin.jac_coeff(), BlockMode::full,
                                vin.data(), vout.data(), ws);
    for (int i = 0; i < n; ++i) block(i, j) = vout[i];
    vin[j] = 0.0;
  }
  return block;
}

/// Per-component diagonal blocks with cross-component coupling dropped.
inline std::vector<SmallMatrix> assemble_diag_block_small(const LinearizedOperator& lin, int e) {
  lin.check_cache();
  const Discretization& sys = *lin.sys;
  const int npe = sys.npe, nc = sys.n_c;
  std::vector<SmallMatrix> blocks(nc, SmallMatrix(npe, npe));
  kernels::Scratch ws;
  std::vector<double> vin(std::size_t(nc) * npe, 0.0), vout(std::size_t(nc) * npe);
  for (int c = 0; c < nc; ++c)
    for (int j = 0; j < npe; ++j) {
      vin[std::size_t(c) * npe + j] = 1.0;
      std::fill(vout.begin(), vout.end(), 0.0);
      kernels::element_diag_apply(sys, *lin.cache, e, lin.mass_coeff(), lin.jac_coeff(), BlockMode::small,
                                  vin.data(), vout.data(), ws);
      for (int i = 0; i < npe; ++i) blocks[c](i, j) = vout[std::size_t(c) * npe + i];
      vin[std::size_t(c) * npe + j] = 0.0;
    }
  return blocks;
}

} // namespace tpdg
