#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "tpdg/common/error.hpp"

namespace tpdg {

enum class PrecondSide { left, right };

struct GmresConfig {
  double tol = 1e-5;
  int restart = 60;
  int max_iterations = 2000;
  // Right preconditioning converges on the true residual ||b - A x|| <=
  // tol ||b||; left converges on the preconditioned one ||P^{-1}(b - A x)||
  // <= tol ||P^{-1} b||. The right-sided true-residual test reproduces the
  // published iteration counts; left is retained as an option.
  PrecondSide side = PrecondSide::right;

  void validate() const {
    if (!(tol > 0.0)) throw ConfigError("GmresConfig: tol must be > 0");
    if (restart < 1) throw ConfigError("GmresConfig: restart must be >= 1");
    if (max_iterations < 1) throw ConfigError("GmresConfig: max_iterations must be >= 1");
  }
};

struct GmresResult {
  std::vector<double> x;
  int iterations = 0;
  std::vector<double> residual_history; // preconditioned residual per iteration
  bool converged = false;
};

/// Thrown when the iteration budget runs out; carries the best iterate.
class GmresFailure : public ConvergenceError {
public:
  GmresFailure(std::string what, GmresResult result)
      : ConvergenceError(std::move(what)), result(std::move(result)) {}
  GmresResult result;
};

using LinearAction = std::function<void(std::span<const double>, std::span<double>)>;

/// Restarted GMRES with modified Gram-Schmidt Arnoldi and Givens rotations,
/// preconditioned on the side selected in the config. The rotation machinery
/// tracks the residual the stopping test uses, so convergence costs no extra
/// products.
inline GmresResult gmres(const LinearAction& op, const LinearAction& pc, std::span<const double> b,
                         const GmresConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = b.size();
  const bool right = cfg.side == PrecondSide::right;
  GmresResult res;
  res.x.assign(n, 0.0);

  auto norm = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };

  std::vector<double> tmp(n), tmp2(n), r(n);
  double target;
  if (right) {
    target = cfg.tol * norm(b);
  } else {
    pc(b, r);
    target = cfg.tol * norm(r);
  }
  if (target == 0.0) {
    res.converged = true;
    return res;
  }

  const int m = cfg.restart;
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  std::vector<double> h(std::size_t(m + 1) * m, 0.0);
  std::vector<double> cs(m), sn(m), g(m + 1);

  while (res.iterations < cfg.max_iterations) {
    // Residual of the preconditioned system at the current iterate.
    op(res.x, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
    if (right)
      r = tmp;
    else
      pc(tmp, r);
    const double beta = norm(r);
    if (beta <= target) {
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    std::fill(h.begin(), h.end(), 0.0);

    int k = 0;
    for (; k < m && res.iterations < cfg.max_iterations; ++k) {
      ++res.iterations;
      if (right) {
        pc(v[k], tmp2);
        op(tmp2, v[k + 1]);
      } else {
        op(v[k], tmp);
        pc(tmp, v[k + 1]);
      }
      for (int j = 0; j <= k; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += v[j][i] * v[k + 1][i];
        h[std::size_t(j) * m + k] = dot;
        for (std::size_t i = 0; i < n; ++i) v[k + 1][i] -= dot * v[j][i];
      }
      const double hkk = norm(v[k + 1]);
      h[std::size_t(k + 1) * m + k] = hkk;
      if (hkk > 0.0)
        for (std::size_t i = 0; i < n; ++i) v[k + 1][i] /= hkk;
      // Apply previous rotations, then create the new one.
      for (int j = 0; j < k; ++j) {
        const double t1 = h[std::size_t(j) * m + k], t2 = h[std::size_t(j + 1) * m + k];
        h[std::size_t(j) * m + k] = cs[j] * t1 + sn[j] * t2;
        h[std::size_t(j + 1) * m + k] = -sn[j] * t1 + cs[j] * t2;
      }
      const double t1 = h[std::size_t(k) * m + k], t2 = h[std::size_t(k + 1) * m + k];
      const double denom = std::hypot(t1, t2);
      cs[k] = denom == 0.0 ? 1.0 : t1 / denom;
      sn[k] = denom == 0.0 ? 0.0 : t2 / denom;
      h[std::size_t(k) * m + k] = denom;
      h[std::size_t(k + 1) * m + k] = 0.0;
      const double gk = g[k];
      g[k] = cs[k] * gk;
      g[k + 1] = -sn[k] * gk;
      res.residual_history.push_back(std::abs(g[k + 1]));
      if (std::abs(g[k + 1]) <= target) {
        ++k;
        break;
      }
    }
    // Back-substitute y and update x (through the preconditioner when the
    // Krylov space lives in the right-preconditioned variables).
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[std::size_t(i) * m + j] * y[j];
      y[i] = s / h[std::size_t(i) * m + i];
    }
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) tmp[i] += y[j] * v[j][i];
    if (right) {
      pc(tmp, tmp2);
      for (std::size_t i = 0; i < n; ++i) res.x[i] += tmp2[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) res.x[i] += tmp[i];
    }
    if (!res.residual_history.empty() && res.residual_history.back() <= target) {
      res.converged = true;
      return res;
    }
  }
  // Budget exhausted: report the best iterate.
  op(res.x, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
  if (right)
    r = tmp;
  else
    pc(tmp, r);
  res.converged = norm(r) <= target;
  if (!res.converged)
    throw GmresFailure("gmres: no convergence within " + std::to_string(cfg.max_iterations) +
                           " iterations (residual " + std::to_string(norm(r)) + ", target " +
                           std::to_string(target) + ")",
                       std::move(res));
  return res;
}

} // namespace tpdg
