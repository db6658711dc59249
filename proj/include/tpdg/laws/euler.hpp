#pragma once

#include <cmath>
#include <cstring>
#include <string>

#include "tpdg/laws/law.hpp"

namespace tpdg {

namespace euler_detail {

inline void check_state(int d, const double* u, const double* x, double gamma) {
  const int nc = d + 2;
  const double rho = u[0];
  double ke = 0.0;
  for (int m = 0; m < d; ++m) ke += u[1 + m] * u[1 + m];
  const double p = (gamma - 1.0) * (u[nc - 1] - 0.5 * ke / rho);
  if (!(rho > 0.0) || !(p > 0.0)) {
    std::string where = "(";
    for (int m = 0; m < d; ++m) where += std::to_string(x ? x[m] : 0.0) + (m + 1 < d ? ", " : ")");
    throw StateError("euler: non-physical state at x = " + where + ": rho = " + std::to_string(rho) +
                     ", p = " + std::to_string(p));
  }
}

inline double pressure(int d, const double* u, double gamma) {
  const int nc = d + 2;
  double ke = 0.0;
  for (int m = 0; m < d; ++m) ke += u[1 + m] * u[1 + m];
  return (gamma - 1.0) * (u[nc - 1] - 0.5 * ke / u[0]);
}

/// dF_dir/du for one direction, written into df[r * nc + c].
inline void flux_jacobian_dir(int d, int dir, const double* u, double gamma, double* df) {
  const int nc = d + 2;
  const double rho = u[0];
  const double inv_rho = 1.0 / rho;
  double vel[3] = {0, 0, 0};
  double ke2 = 0.0; // |v|^2 / 2
  for (int m = 0; m < d; ++m) {
    vel[m] = u[1 + m] * inv_rho;
    ke2 += 0.5 * vel[m] * vel[m];
  }
  const double p = pressure(d, u, gamma);
  const double h = (u[nc - 1] + p) * inv_rho; // total enthalpy
  const double vd = vel[dir];
  // dp/du.
  double dp[5];
  dp[0] = (gamma - 1.0) * ke2;
  for (int m = 0; m < d; ++m) dp[1 + m] = -(gamma - 1.0) * vel[m];
  dp[nc - 1] = gamma - 1.0;

  // Mass row: d(m_dir)/du.
  for (int c = 0; c < nc; ++c) df[0 * nc + c] = 0.0;
  df[0 * nc + 1 + dir] = 1.0;
  // Momentum rows: d(m_i v_dir + delta_{i,dir} p)/du.
  for (int i = 0; i < d; ++i) {
    double* row = df + (1 + i) * nc;
    row[0] = -vel[i] * vd;
    for (int c = 1; c < nc; ++c) row[c] = 0.0;
    row[1 + i] += vd;
    row[1 + dir] += vel[i];
    if (i == dir)
      for (int c = 0; c < nc; ++c) row[c] += dp[c];
  }
  // Energy row: d((E + p) v_dir)/du.
  double* row = df + (nc - 1) * nc;
  row[0] = vd * (dp[0] - h);
  for (int m = 0; m < d; ++m) row[1 + m] = vd * dp[1 + m];
  row[1 + dir] += h;
  row[nc - 1] = vd * (1.0 + dp[nc - 1]);
}

/// s = |v.n| + c and ds/du.
inline double wave_speed(int d, const double* u, const double* n, double gamma, double* ds) {
  const int nc = d + 2;
  const double rho = u[0];
  const double inv_rho = 1.0 / rho;
  double mn = 0.0, ke = 0.0;
  for (int m = 0; m < d; ++m) {
    mn += u[1 + m] * n[m];
    ke += u[1 + m] * u[1 + m];
  }
  const double vn = mn * inv_rho;
  const double p = pressure(d, u, gamma);
  const double c = std::sqrt(gamma * p * inv_rho);
  if (ds) {
    const double sgn = vn >= 0.0 ? 1.0 : -1.0;
    // d(p/rho)/du, then dc = gamma/(2c) d(p/rho).
    const double gm1 = gamma - 1.0;
    double dpr[5];
    dpr[0] = gm1 * (-u[nc - 1] * inv_rho * inv_rho + ke * inv_rho * inv_rho * inv_rho);
    for (int m = 0; m < d; ++m) dpr[1 + m] = -gm1 * u[1 + m] * inv_rho * inv_rho;
    dpr[nc - 1] = gm1 * inv_rho;
    ds[0] = sgn * (-vn * inv_rho) + gamma / (2.0 * c) * dpr[0];
    for (int m = 0; m < d; ++m) ds[1 + m] = sgn * n[m] * inv_rho + gamma / (2.0 * c) * dpr[1 + m];
    ds[nc - 1] = gamma / (2.0 * c) * dpr[nc - 1];
  }
  return std::abs(vn) + c;
}

} // namespace euler_detail

/// Compressible Euler equations in conservative variables with the local
/// Lax-Friedrichs numerical flux and analytic trace Jacobians (the
/// dissipation coefficient is differentiated on the side attaining the max).
inline Law euler_law(int d, double gamma = 1.4) {
  if (d != 2 && d != 3) throw ConfigError("euler_law: d must be 2 or 3");
  if (!(gamma > 1.0)) throw ConfigError("euler_law: gamma must exceed 1");
  Law law;
  law.dim = d;
  law.n_c = d + 2;
  const int nc = law.n_c;

  law.flux = [d, nc, gamma](const double* u, const double* x, double* f) {
    euler_detail::check_state(d, u, x, gamma);
    const double inv_rho = 1.0 / u[0];
    const double p = euler_detail::pressure(d, u, gamma);
    for (int dir = 0; dir < d; ++dir) {
      const double vd = u[1 + dir] * inv_rho;
      double* fd = f + dir * nc;
      fd[0] = u[1 + dir];
      for (int i = 0; i < d; ++i) fd[1 + i] = u[1 + i] * vd;
      fd[1 + dir] += p;
      fd[nc - 1] = (u[nc - 1] + p) * vd;
    }
  };

  law.flux_jacobian = [d, nc, gamma](const double* u, const double* x, double* df) {
    euler_detail::check_state(d, u, x, gamma);
    for (int dir = 0; dir < d; ++dir) euler_detail::flux_jacobian_dir(d, dir, u, gamma, df + dir * nc * nc);
  };

  law.num_flux = [d, nc, gamma](const double* um, const double* up, const double* n, const double* x,
                                double* fhat) {
    euler_detail::check_state(d, um, x, gamma);
    euler_detail::check_state(d, up, x, gamma);
    const double sm = euler_detail::wave_speed(d, um, n, gamma, nullptr);
    const double sp = euler_detail::wave_speed(d, up, n, gamma, nullptr);
    const double lam = std::max(sm, sp);
    double fm[15], fp[15];
    const double invm = 1.0 / um[0], invp = 1.0 / up[0];
    const double pm = euler_detail::pressure(d, um, gamma), pp = euler_detail::pressure(d, up, gamma);
    for (int c = 0; c < nc; ++c) fhat[c] = 0.0;
    for (int dir = 0; dir < d; ++dir) {
      const double vdm = um[1 + dir] * invm, vdp = up[1 + dir] * invp;
      fm[0] = um[1 + dir];
      fp[0] = up[1 + dir];
      for (int i = 0; i < d; ++i) {
        fm[1 + i] = um[1 + i] * vdm;
        fp[1 + i] = up[1 + i] * vdp;
      }
      fm[1 + dir] += pm;
      fp[1 + dir] += pp;
      fm[nc - 1] = (um[nc - 1] + pm) * vdm;
      fp[nc - 1] = (up[nc - 1] + pp) * vdp;
      for (int c = 0; c < nc; ++c) fhat[c] += 0.5 * n[dir] * (fm[c] + fp[c]);
    }
    for (int c = 0; c < nc; ++c) fhat[c] += 0.5 * lam * (um[c] - up[c]);
  };

  law.num_flux_jac_minus = [d, nc, gamma](const double* um, const double* up, const double* n,
                                          const double* x, double* out) {
    euler_detail::check_state(d, um, x, gamma);
    double dsm[5];
    const double sm = euler_detail::wave_speed(d, um, n, gamma, dsm);
    const double sp = euler_detail::wave_speed(d, up, n, gamma, nullptr);
    const double lam = std::max(sm, sp);
    double df[3 * 5 * 5];
    for (int dir = 0; dir < d; ++dir) euler_detail::flux_jacobian_dir(d, dir, um, gamma, df + dir * nc * nc);
    for (int r = 0; r < nc; ++r)
      for (int c = 0; c < nc; ++c) {
        double v = 0.0;
        for (int dir = 0; dir < d; ++dir) v += n[dir] * df[(dir * nc + r) * nc + c];
        v *= 0.5;
        if (r == c) v += 0.5 * lam;
        if (sm >= sp) v += 0.5 * (um[r] - up[r]) * dsm[c];
        out[r * nc + c] = v;
      }
  };

  law.num_flux_jac_plus = [d, nc, gamma](const double* um, const double* up, const double* n,
                                         const double* x, double* out) {
    euler_detail::check_state(d, up, x, gamma);
    double dsp[5];
    const double sm = euler_detail::wave_speed(d, um, n, gamma, nullptr);
    const double sp = euler_detail::wave_speed(d, up, n, gamma, dsp);
    const double lam = std::max(sm, sp);
    double df[3 * 5 * 5];
    for (int dir = 0; dir < d; ++dir) euler_detail::flux_jacobian_dir(d, dir, up, gamma, df + dir * nc * nc);
    for (int r = 0; r < nc; ++r)
      for (int c = 0; c < nc; ++c) {
        double v = 0.0;
        for (int dir = 0; dir < d; ++dir) v += n[dir] * df[(dir * nc + r) * nc + c];
        v *= 0.5;
        if (r == c) v -= 0.5 * lam;
        if (sm < sp) v += 0.5 * (um[r] - up[r]) * dsp[c];
        out[r * nc + c] = v;
      }
  };

  law.boundary_state = [nc](const double*, double, const double* u_in, double* u_out) {
    std::memcpy(u_out, u_in, nc * sizeof(double));
  };
  return law;
}

} // namespace tpdg
