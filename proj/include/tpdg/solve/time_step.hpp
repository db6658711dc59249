#pragma once

#include <chrono>
#include <functional>

#include "tpdg/precond/ksvd.hpp"
#include "tpdg/solve/newton.hpp"

namespace tpdg {

enum class PrecondKind { jacobi_full, jacobi_small, ksvd_full, ksvd_small };

inline const char* precond_name(PrecondKind pk) {
  switch (pk) {
    case PrecondKind::jacobi_full: return "jacobi_full";
    case PrecondKind::jacobi_small: return "jacobi_small";
    case PrecondKind::ksvd_full: return "ksvd_full";
    case PrecondKind::ksvd_small: return "ksvd_small";
  }
  return "?";
}

struct StepStats {
  std::vector<int> gmres_per_solve;
  std::vector<std::vector<double>> residual_histories; // filled when requested
  bool keep_residual_history = false;
  int newton_steps = 0;
  double form_seconds = 0.0;
  double pc_apply_seconds = 0.0;
  int fallback_elements = 0;

  double average_gmres() const {
    if (gmres_per_solve.empty()) return 0.0;
    double s = 0.0;
    for (int v : gmres_per_solve) s += v;
    return s / double(gmres_per_solve.size());
  }
};

struct ImplicitConfig {
  GmresConfig gmres;
  NewtonConfig newton;
  PrecondKind precond = PrecondKind::jacobi_full;
  KsvdConfig ksvd;
  long jacobi_entry_budget = 300'000'000;
};

namespace step_detail {

inline double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// One linear solve of (M - gdt J)|_w s = -R with a freshly formed
/// preconditioner (the linearization and the preconditioner are rebuilt each
/// Newton step).
inline StateVector newton_linear_solve(const Discretization& sys, const StateVector& w, double t_stage,
                                       double gdt, const StateVector& r, const ImplicitConfig& cfg,
                                       StepStats* stats, int* gmres_count) {
  const LinearizationCache cache = build_cache(sys, w, t_stage);
  const LinearizedOperator lin = make_linearized_operator(sys, cache, gdt);

  const auto t0 = std::chrono::steady_clock::now();
  std::function<void(std::span<const double>, std::span<double>)> pc_apply;
  BlockJacobiPC jac;
  KsvdPC2D k2;
  KsvdPC3D k3;
  int fallbacks = 0;
  switch (cfg.precond) {
    case PrecondKind::jacobi_full:
      jac = form_block_jacobi(lin, BlockMode::full, cfg.jacobi_entry_budget);
      pc_apply = [&jac](std::span<const double> in, std::span<double> out) { jac.apply(in, out); };
      break;
    case PrecondKind::jacobi_small:
      jac = form_block_jacobi(lin, BlockMode::small, cfg.jacobi_entry_budget);
      pc_apply = [&jac](std::span<const double> in, std::span<double> out) { jac.apply(in, out); };
      break;
    case PrecondKind::ksvd_full:
    case PrecondKind::ksvd_small: {
      const BlockMode bm = cfg.precond == PrecondKind::ksvd_full ? BlockMode::full : BlockMode::small;
      if (sys.dim == 2) {
        k2 = form_ksvd_2d(lin, bm, cfg.ksvd);
        fallbacks = int(k2.fallbacks.size());
        pc_apply = [&k2](std::span<const double> in, std::span<double> out) { k2.apply(in, out); };
      } else {
        k3 = form_ksvd_3d(lin, bm, cfg.ksvd);
        fallbacks = int(k3.fallbacks.size());
        pc_apply = [&k3](std::span<const double> in, std::span<double> out) { k3.apply(in, out); };
      }
      break;
    }
  }
  if (stats) {
    stats->form_seconds += seconds_since(t0);
    stats->fallback_elements += fallbacks;
  }

  auto op = [&](std::span<const double> in, std::span<double> out) {
    StateVector vin = sys.make_state();
    std::copy(in.begin(), in.end(), vin.data.begin());
    const StateVector vout = jacobian_apply(lin, vin);
    std::copy(vout.data.begin(), vout.data.end(), out.begin());
  };
  auto pc_timed = [&](std::span<const double> in, std::span<double> out) {
    const auto tp = std::chrono::steady_clock::now();
    pc_apply(in, out);
    if (stats) stats->pc_apply_seconds += seconds_since(tp);
  };

  std::vector<double> rhs(r.data.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -r.data[i];
  const GmresResult gr = gmres(op, pc_timed, rhs, cfg.gmres);
  if (gmres_count) *gmres_count = gr.iterations;
  if (stats) {
    stats->gmres_per_solve.push_back(gr.iterations);
    if (stats->keep_residual_history) stats->residual_histories.push_back(gr.residual_history);
  }

  StateVector step = sys.make_state();
  std::copy(gr.x.begin(), gr.x.end(), step.data.begin());
  return step;
}

/// Newton solve of the stage equation
///   M (w - base) - accum - gdt * r(w, t_stage) = 0.
inline StateVector solve_stage(const Discretization& sys, const StateVector& base,
                               const StateVector* accum, double gdt, double t_stage,
                               const ImplicitConfig& cfg, StepStats* stats) {
  auto residual_fn = [&](const StateVector& w) {
    StateVector diff = w;
    for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= base.data[i];
    StateVector out = mass_apply(sys, diff);
    const StateVector rw = residual(sys, w, t_stage);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      out.data[i] -= gdt * rw.data[i];
      if (accum) out.data[i] -= accum->data[i];
    }
    return out;
  };
  auto solve_fn = [&](const StateVector& w, const StateVector& r, int* count) {
    return newton_linear_solve(sys, w, t_stage, gdt, r, cfg, stats, count);
  };
  NewtonResult nres = newton(residual_fn, solve_fn, base, cfg.newton);
  if (stats) stats->newton_steps += nres.steps;
  return std::move(nres.u);
}

} // namespace step_detail

/// One backward Euler step: solve M(u' - u) = dt r(u', t + dt).
inline StateVector step_backward_euler(const Discretization& sys, const StateVector& u, double t,
                                       double dt, const ImplicitConfig& cfg, StepStats* stats = nullptr) {
  if (!(dt > 0.0)) throw ConfigError("step_backward_euler: dt must be positive");
  return step_detail::solve_stage(sys, u, nullptr, dt, t + dt, cfg, stats);
}

/// Alexander's three-stage, third-order, L-stable, stiffly accurate DIRK.
/// gamma is the root of 6 g^3 - 18 g^2 + 9 g - 1 in (1/6, 1/2).
inline constexpr double dirk3_gamma() { return 0.435866521508458999416019; }

inline StateVector step_dirk3(const Discretization& sys, const StateVector& u, double t, double dt,
                              const ImplicitConfig& cfg, StepStats* stats = nullptr) {
  if (!(dt > 0.0)) throw ConfigError("step_dirk3: dt must be positive");
  const double g = dirk3_gamma();
  const double c2 = 0.5 * (1.0 + g);
  const double b1 = -1.5 * g * g + 4.0 * g - 0.25;
  const double b2 = 1.5 * g * g - 5.0 * g + 1.25;
  const double a[3][3] = {{g, 0.0, 0.0}, {c2 - g, g, 0.0}, {b1, b2, g}};
  const double c[3] = {g, c2, 1.0};

  StateVector w = u;
  std::vector<StateVector> stage_r;
  for (int s = 0; s < 3; ++s) {
    StateVector accum = sys.make_state();
    for (int j = 0; j < s; ++j)
      for (std::size_t i = 0; i < accum.data.size(); ++i)
        accum.data[i] += dt * a[s][j] * stage_r[j].data[i];
    w = step_detail::solve_stage(sys, u, s == 0 ? nullptr : &accum, dt * a[s][s], t + c[s] * dt, cfg,
                                 stats);
    stage_r.push_back(residual(sys, w, t + c[s] * dt));
  }
  return w; // stiffly accurate: b equals the last stage row
}

/// Classical explicit RK4 with a per-stage mass solve.
inline StateVector step_rk4(const Discretization& sys, const StateVector& u, double t, double dt,
                            double mass_tol = 1e-12, MassSolveStats* mass_stats = nullptr) {
  if (!(dt > 0.0)) throw ConfigError("step_rk4: dt must be positive");
  auto rhs = [&](const StateVector& w, double tw) {
    return mass_solve(sys, residual(sys, w, tw), mass_tol, mass_stats);
  };
  auto axpy = [&](const StateVector& base, double coef, const StateVector& k) {
    StateVector out = base;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += coef * k.data[i];
    return out;
  };
  const StateVector k1 = rhs(u, t);
  const StateVector k2 = rhs(axpy(u, 0.5 * dt, k1), t + 0.5 * dt);
  const StateVector k3 = rhs(axpy(u, 0.5 * dt, k2), t + 0.5 * dt);
  const StateVector k4 = rhs(axpy(u, dt, k3), t + dt);
  StateVector out = u;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] += dt / 6.0 * (k1.data[i] + 2.0 * k2.data[i] + 2.0 * k3.data[i] + k4.data[i]);
  return out;
}

} // namespace tpdg
