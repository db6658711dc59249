#pragma once

#include <functional>
#include <vector>

#include "tpdg/common/parallel.hpp"
#include "tpdg/dg/mesh.hpp"
#include "tpdg/laws/law.hpp"
#include "tpdg/ops/kernels.hpp"
#include "tpdg/ops/state.hpp"

namespace tpdg {

/// Reference element + mesh geometry + conservation law, with the derived
/// sizes and collocation data the operators need. Immutable after
/// construction; share freely across threads.
struct Discretization {
  ReferenceElement ref;
  MeshGeometry mesh;
  Law law;

  int dim = 0;
  int n1d = 0;  // p + 1
  int mu = 0;
  int npe = 0;  // n1d^dim
  int nqv = 0;  // mu^dim
  int nqf = 0;  // mu^(dim-1)
  int n_c = 0;

  std::vector<double> colloc_jdet; // [elem][(p+1)^dim], for the mass preconditioner

  StateVector make_state() const { return StateVector(mesh.n_elements, n_c, npe); }

  const double* colloc_jdet_at(int e) const { return colloc_jdet.data() + std::size_t(e) * npe; }
};

inline Discretization make_discretization(ReferenceElement ref, MeshGeometry mesh, Law law) {
  law.validate();
  if (law.dim != mesh.dim) throw ConfigError("make_discretization: law and mesh dimensions differ");
  Discretization sys;
  sys.dim = mesh.dim;
  sys.n1d = ref.nodes_per_dim();
  sys.mu = ref.mu;
  sys.npe = 1;
  sys.nqv = 1;
  for (int a = 0; a < sys.dim; ++a) {
    sys.npe *= sys.n1d;
    sys.nqv *= sys.mu;
  }
  sys.nqf = sys.nqv / sys.mu;
  sys.n_c = law.n_c;

  // Jacobian determinants at the collocation grid (p+1 Gauss points per
  // direction), used by the under-integrated mass inverse.
  sys.colloc_jdet.assign(std::size_t(mesh.n_elements) * sys.npe, 0.0);
  std::array<double, 9> jac{};
  std::array<double, 3> xi{};
  for (int e = 0; e < mesh.n_elements; ++e)
    for (int q = 0; q < sys.npe; ++q) {
      int rem = q;
      for (int a = 0; a < sys.dim; ++a) {
        xi[a] = ref.cpoints[rem % sys.n1d];
        rem /= sys.n1d;
      }
      mesh.map_jacobian(e, xi.data(), jac.data());
      double det;
      if (sys.dim == 2)
        det = jac[0] * jac[3] - jac[1] * jac[2];
      else
        det = jac[0] * (jac[4] * jac[8] - jac[5] * jac[7]) - jac[1] * (jac[3] * jac[8] - jac[5] * jac[6]) +
              jac[2] * (jac[3] * jac[7] - jac[4] * jac[6]);
      if (det <= 0.0)
        throw ConfigError("make_discretization: non-positive map Jacobian at collocation point in element " +
                          std::to_string(e));
      sys.colloc_jdet[std::size_t(e) * sys.npe + q] = det;
    }

  sys.ref = std::move(ref);
  sys.mesh = std::move(mesh);
  sys.law = std::move(law);
  return sys;
}

namespace kernels {

/// Nodal trace of one component on a face: slice the coefficients at the
/// face node layer, then evaluate the tangential bases at the face
/// quadrature points. vals has nqf entries, first tangential axis fastest.
inline void face_trace(const Discretization& sys, int face, const double* coeff, double* vals,
                       Scratch& ws) {
  const int n = sys.n1d, mu = sys.mu;
  const int axis = face_axis(face);
  const int layer = face_side(face) == 0 ? 0 : n - 1;
  if (sys.dim == 2) {
    // Tangential axis is the other one.
    ws.f.resize(n);
    for (int j = 0; j < n; ++j) ws.f[j] = (axis == 0) ? coeff[j * n + layer] : coeff[layer * n + j];
    for (int a = 0; a < mu; ++a) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += sys.ref.g(a, j) * ws.f[j];
      vals[a] = s;
    }
    return;
  }
  const auto tang = face_param_axes(3, axis);
  ws.f.resize(std::size_t(n) * n);
  for (int j1 = 0; j1 < n; ++j1)
    for (int j0 = 0; j0 < n; ++j0) {
      int idx[3];
      idx[axis] = layer;
      idx[tang[0]] = j0;
      idx[tang[1]] = j1;
      ws.f[j1 * n + j0] = coeff[(idx[2] * n + idx[1]) * n + idx[0]];
    }
  // Apply G along both tangential axes.
  ws.a.resize(std::size_t(mu) * n);
  for (int a = 0; a < mu; ++a)
    for (int j1 = 0; j1 < n; ++j1) {
      double s = 0.0;
      for (int j0 = 0; j0 < n; ++j0) s += sys.ref.g(a, j0) * ws.f[j1 * n + j0];
      ws.a[j1 * mu + a] = s;
    }
  for (int b = 0; b < mu; ++b)
    for (int a = 0; a < mu; ++a) {
      double s = 0.0;
      for (int j1 = 0; j1 < n; ++j1) s += sys.ref.g(b, j1) * ws.a[j1 * mu + a];
      vals[b * mu + a] = s;
    }
}

/// Adjoint of face_trace: out += scatter of G^T g into the face node layer.
/// g must already carry the face weights.
inline void face_lift(const Discretization& sys, int face, const double* g, double* out, Scratch& ws) {
  const int n = sys.n1d, mu = sys.mu;
  const int axis = face_axis(face);
  const int layer = face_side(face) == 0 ? 0 : n - 1;
  if (sys.dim == 2) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < mu; ++a) s += sys.ref.g(a, j) * g[a];
      if (axis == 0)
        out[j * n + layer] += s;
      else
        out[layer * n + j] += s;
    }
    return;
  }
  const auto tang = face_param_axes(3, axis);
  ws.a.resize(std::size_t(n) * mu);
  for (int j0 = 0; j0 < n; ++j0)
    for (int b = 0; b < mu; ++b) {
      double s = 0.0;
      for (int a = 0; a < mu; ++a) s += sys.ref.g(a, j0) * g[b * mu + a];
      ws.a[j0 * mu + b] = s;
    }
  for (int j1 = 0; j1 < n; ++j1)
    for (int j0 = 0; j0 < n; ++j0) {
      double s = 0.0;
      for (int b = 0; b < mu; ++b) s += sys.ref.g(b, j1) * ws.a[j0 * mu + b];
      int idx[3];
      idx[axis] = layer;
      idx[tang[0]] = j0;
      idx[tang[1]] = j1;
      out[(idx[2] * n + idx[1]) * n + idx[0]] += s;
    }
}

/// Trace of the neighbor across a face, permuted into this element's face
/// quadrature enumeration.
inline void neighbor_trace(const Discretization& sys, int e, int face, const StateVector& u, int c,
                           double* vals, Scratch& ws) {
  const auto& fc = sys.mesh.faces[e][face];
  ws.b.resize(sys.nqf);
  face_trace(sys, fc.neighbor_face, u.component(fc.neighbor, c), ws.b.data(), ws);
  const int mu = sys.mu;
  for (int q = 0; q < sys.nqf; ++q) {
    const auto [qa, qb] =
        orient_face_coords(sys.dim, fc.orientation, mu, q % mu, sys.dim == 3 ? q / mu : 0);
    vals[q] = ws.b[(sys.dim == 3 ? qb * mu : 0) + qa];
  }
}

} // namespace kernels

/// Semi-discrete right-hand side r(u, t): volume flux integrated against
/// test-function gradients minus the numerical-flux face terms. Element
/// outputs are disjoint; the face flux is evaluated once per side.
inline StateVector residual(const Discretization& sys, const StateVector& u, double t = 0.0) {
  if (!u.same_shape(StateVector(sys.mesh.n_elements, sys.n_c, sys.npe)))
    throw ShapeError("residual: state shape mismatch");
  if (!u.all_finite()) throw StateError("residual: non-finite coefficient in the state");
  StateVector out = sys.make_state();
  const int nc = sys.n_c, nqv = sys.nqv, nqf = sys.nqf, d = sys.dim;

  parallel_for(sys.mesh.n_elements, [&](int e) {
    kernels::Scratch ws;
    std::vector<double> vals(std::size_t(nc) * nqv);
    std::vector<double> ft(std::size_t(d) * nc * nqv);
    std::vector<double> uq(nc), fq(std::size_t(d) * nc);
    for (int c = 0; c < nc; ++c)
      kernels::eval_at_quad(sys.ref.g, d, u.component(e, c), vals.data() + std::size_t(c) * nqv, ws);
    const double* adj = sys.mesh.adj_at(e);
    const double* xv = sys.mesh.vol_x_at(e);
    for (int q = 0; q < nqv; ++q) {
      for (int c = 0; c < nc; ++c) uq[c] = vals[std::size_t(c) * nqv + q];
      sys.law.flux(uq.data(), xv + std::size_t(q) * d, fq.data());
      const double* a = adj + std::size_t(q) * d * d;
      for (int k = 0; k < d; ++k)
        for (int c = 0; c < nc; ++c) {
          double s = 0.0;
          for (int m = 0; m < d; ++m) s += a[k * d + m] * fq[std::size_t(m) * nc + c];
          ft[(std::size_t(k) * nc + c) * nqv + q] = s;
        }
    }
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < nc; ++c)
        kernels::integrate_back(sys.ref.gw, sys.ref.dw, d, k, ft.data() + (std::size_t(k) * nc + c) * nqv,
                                out.component(e, c), ws);

    // Face terms.
    std::vector<double> tm(std::size_t(nc) * nqf), tp(std::size_t(nc) * nqf);
    std::vector<double> um(nc), up(nc), fhat(nc), lifted(std::size_t(nc) * nqf);
    for (int f = 0; f < 2 * d; ++f) {
      const auto& fc = sys.mesh.faces[e][f];
      for (int c = 0; c < nc; ++c)
        kernels::face_trace(sys, f, u.component(e, c), tm.data() + std::size_t(c) * nqf, ws);
      const double* fx = sys.mesh.face_x_at(e, f);
      if (fc.neighbor >= 0) {
        for (int c = 0; c < nc; ++c)
          kernels::neighbor_trace(sys, e, f, u, c, tp.data() + std::size_t(c) * nqf, ws);
      } else {
        for (int q = 0; q < nqf; ++q) {
          for (int c = 0; c < nc; ++c) um[c] = tm[std::size_t(c) * nqf + q];
          sys.law.boundary_state(fx + std::size_t(q) * d, t, um.data(), up.data());
          for (int c = 0; c < nc; ++c) tp[std::size_t(c) * nqf + q] = up[c];
        }
      }
      const double* fw = sys.mesh.face_w_at(e, f);
      const double* fn = sys.mesh.face_n_at(e, f);
      for (int q = 0; q < nqf; ++q) {
        for (int c = 0; c < nc; ++c) {
          um[c] = tm[std::size_t(c) * nqf + q];
          up[c] = tp[std::size_t(c) * nqf + q];
        }
        sys.law.num_flux(um.data(), up.data(), fn + std::size_t(q) * d, fx + std::size_t(q) * d,
                         fhat.data());
        for (int c = 0; c < nc; ++c) lifted[std::size_t(c) * nqf + q] = -fw[q] * fhat[c];
      }
      for (int c = 0; c < nc; ++c)
        kernels::face_lift(sys, f, lifted.data() + std::size_t(c) * nqf, out.component(e, c), ws);
    }
  });
  return out;
}

/// v -> M v, per element: (G^T W (x) ...) J_T (G (x) ...).
inline StateVector mass_apply(const Discretization& sys, const StateVector& v) {
  StateVector out = sys.make_state();
  const int nqv = sys.nqv;
  parallel_for(sys.mesh.n_elements, [&](int e) {
    kernels::Scratch ws;
    std::vector<double> vals(nqv);
    const double* jd = sys.mesh.jdet_at(e);
    for (int c = 0; c < sys.n_c; ++c) {
      kernels::eval_at_quad(sys.ref.g, sys.dim, v.component(e, c), vals.data(), ws);
      for (int q = 0; q < nqv; ++q) vals[q] *= jd[q];
      kernels::integrate_back(sys.ref.gw, sys.ref.dw, sys.dim, -1, vals.data(), out.component(e, c), ws);
    }
  });
  return out;
}

struct MassSolveStats {
  int max_iterations = 0;
  long total_iterations = 0;
};

/// Solve M x = b element by element with preconditioned CG. The
/// preconditioner is the under-integrated inverse built from the square
/// collocation operators; on straight-sided elements it is exact and the
/// solve converges in one iteration.
inline StateVector mass_solve(const Discretization& sys, const StateVector& b, double tol = 1e-12,
                              MassSolveStats* stats = nullptr, int max_iter = 200) {
  StateVector out = sys.make_state();
  const int nqv = sys.nqv, npe = sys.npe, d = sys.dim, n1d = sys.n1d;
  std::vector<int> iters(std::size_t(sys.mesh.n_elements) * sys.n_c, 0);

  parallel_for(sys.mesh.n_elements, [&](int e) {
    kernels::Scratch ws;
    std::vector<double> vals(nqv), r(npe), z(npe), p(npe), q(npe), x(npe), fiber, sol;
    const double* jd = sys.mesh.jdet_at(e);
    const double* cjd = sys.colloc_jdet_at(e);
    int ext[3] = {n1d, n1d, n1d};

    auto apply_m = [&](const double* in, double* outv) {
      kernels::eval_at_quad(sys.ref.g, d, in, vals.data(), ws);
      for (int k = 0; k < nqv; ++k) vals[k] *= jd[k];
      for (int k = 0; k < npe; ++k) outv[k] = 0.0;
      kernels::integrate_back(sys.ref.gw, sys.ref.dw, d, -1, vals.data(), outv, ws);
    };
    auto apply_pc = [&](const double* in, double* outv) {
      for (int k = 0; k < npe; ++k) outv[k] = in[k];
      for (int a = 0; a < d; ++a) kernels::axis_solve(sys.ref.ghat_tw_lu, d, ext, a, outv, fiber, sol);
      for (int k = 0; k < npe; ++k) outv[k] /= cjd[k];
      for (int a = 0; a < d; ++a) kernels::axis_solve(sys.ref.ghat_lu, d, ext, a, outv, fiber, sol);
    };
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b2) {
      double s = 0.0;
      for (int k = 0; k < npe; ++k) s += a[k] * b2[k];
      return s;
    };

    for (int c = 0; c < sys.n_c; ++c) {
      const double* rhs = b.component(e, c);
      double bnorm = 0.0;
      for (int k = 0; k < npe; ++k) bnorm += rhs[k] * rhs[k];
      bnorm = std::sqrt(bnorm);
      std::fill(x.begin(), x.end(), 0.0);
      if (bnorm == 0.0) continue;
      for (int k = 0; k < npe; ++k) r[k] = rhs[k];
      apply_pc(r.data(), z.data());
      p = z;
      double rz = dot(r, z);
      int it = 0;
      while (true) {
        ++it;
        if (it > max_iter)
          throw ConvergenceError("mass_solve: PCG exceeded " + std::to_string(max_iter) +
                                 " iterations on element " + std::to_string(e));
        apply_m(p.data(), q.data());
        const double alpha = rz / dot(p, q);
        for (int k = 0; k < npe; ++k) {
          x[k] += alpha * p[k];
          r[k] -= alpha * q[k];
        }
        double rnorm = 0.0;
        for (int k = 0; k < npe; ++k) rnorm += r[k] * r[k];
        if (std::sqrt(rnorm) <= tol * bnorm) break;
        apply_pc(r.data(), z.data());
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int k = 0; k < npe; ++k) p[k] = z[k] + beta * p[k];
      }
      iters[std::size_t(e) * sys.n_c + c] = it;
      for (int k = 0; k < npe; ++k) out.component(e, c)[k] = x[k];
    }
  });
  if (stats) {
    for (int v : iters) {
      stats->max_iterations = std::max(stats->max_iterations, v);
      stats->total_iterations += v;
    }
  }
  return out;
}

/// Interpolate a pointwise state function onto the nodal basis.
inline StateVector interpolate(const Discretization& sys,
                               const std::function<void(const double*, double*)>& fn) {
  StateVector u = sys.make_state();
  const int n1d = sys.n1d;
  std::array<double, 3> xi{}, x{};
  std::vector<double> state(sys.n_c);
  for (int e = 0; e < sys.mesh.n_elements; ++e)
    for (int q = 0; q < sys.npe; ++q) {
      int rem = q;
      for (int a = 0; a < sys.dim; ++a) {
        xi[a] = sys.ref.nodes[rem % n1d];
        rem /= n1d;
      }
      sys.mesh.map_point(e, xi.data(), x.data());
      fn(x.data(), state.data());
      for (int c = 0; c < sys.n_c; ++c) u.component(e, c)[q] = state[c];
    }
  return u;
}

/// Component-wise L2 errors against a closed-form state at time t.
inline std::vector<double> l2_error(const Discretization& sys, const StateVector& u, double t) {
  if (!sys.law.exact) throw ConfigError("l2_error: the law carries no exact solution");
  std::vector<double> err2(sys.n_c, 0.0);
  kernels::Scratch ws;
  std::vector<double> vals(std::size_t(sys.n_c) * sys.nqv), ex(sys.n_c);
  for (int e = 0; e < sys.mesh.n_elements; ++e) {
    for (int c = 0; c < sys.n_c; ++c)
      kernels::eval_at_quad(sys.ref.g, sys.dim, u.component(e, c), vals.data() + std::size_t(c) * sys.nqv,
                            ws);
    const double* jd = sys.mesh.jdet_at(e);
    const double* xv = sys.mesh.vol_x_at(e);
    for (int q = 0; q < sys.nqv; ++q) {
      sys.law.exact(xv + std::size_t(q) * sys.dim, t, ex.data());
      double wq = 1.0;
      int rem = q;
      for (int a = 0; a < sys.dim; ++a) {
        wq *= sys.ref.qweights[rem % sys.mu];
        rem /= sys.mu;
      }
      for (int c = 0; c < sys.n_c; ++c) {
        const double diff = vals[std::size_t(c) * sys.nqv + q] - ex[c];
        err2[c] += wq * jd[q] * diff * diff;
      }
    }
  }
  for (auto& v : err2) v = std::sqrt(v);
  return err2;
}

} // namespace tpdg
