#pragma once

#include <functional>
#include <vector>

#include "tpdg/ops/state.hpp"
#include "tpdg/solve/gmres.hpp"

namespace tpdg {

struct NewtonConfig {
  double tol = 1e-8;          // relative to the initial residual norm
  int max_iterations = 30;
  double absolute_floor = 1e-14;

  void validate() const {
    if (!(tol > 0.0)) throw ConfigError("NewtonConfig: tol must be > 0");
    if (max_iterations < 1) throw ConfigError("NewtonConfig: max_iterations must be >= 1");
  }
};

struct NewtonResult {
  StateVector u;
  int steps = 0;
  std::vector<int> gmres_iterations; // one entry per linear solve
  std::vector<double> residual_norms;
};

/// Full-step Newton. residual_fn evaluates R(u); linear_solve_fn solves
/// J(u) s = -R and reports its iteration count. Divergence (no new best
/// residual within a three-step patience window) raises ConvergenceError.
inline NewtonResult newton(
    const std::function<StateVector(const StateVector&)>& residual_fn,
    const std::function<StateVector(const StateVector&, const StateVector&, int*)>& linear_solve_fn,
    StateVector u0, const NewtonConfig& cfg = {}) {
  cfg.validate();
  NewtonResult res;
  res.u = std::move(u0);
  StateVector r = residual_fn(res.u);
  double norm0 = r.norm2();
  res.residual_norms.push_back(norm0);
  if (norm0 <= cfg.absolute_floor) return res;
  const double target = std::max(cfg.tol * norm0, cfg.absolute_floor);

  double best = norm0;
  int stale = 0;
  while (res.residual_norms.back() > target) {
    if (res.steps >= cfg.max_iterations)
      throw ConvergenceError("newton: no convergence within " + std::to_string(cfg.max_iterations) +
                             " steps (residual " + std::to_string(res.residual_norms.back()) + ")");
    int gmres_count = 0;
    const StateVector step = linear_solve_fn(res.u, r, &gmres_count);
    res.gmres_iterations.push_back(gmres_count);
    for (std::size_t i = 0; i < res.u.data.size(); ++i) res.u.data[i] += step.data[i];
    ++res.steps;
    r = residual_fn(res.u);
    const double norm = r.norm2();
    res.residual_norms.push_back(norm);
    if (norm < best) {
      best = norm;
      stale = 0;
    } else if (++stale >= 3) {
      throw ConvergenceError("newton: residual stagnated/diverged at " + std::to_string(norm) +
                             " after " + std::to_string(res.steps) + " steps");
    }
  }
  return res;
}

} // namespace tpdg
