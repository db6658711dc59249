#pragma once

#include <algorithm>
#include <array>
#include <cstring>

#include "tpdg/laws/law.hpp"

namespace tpdg {

enum class AdvectionField { a, b, c }; // constant / separable / rotational

/// Velocity of the named 2D field at x.
inline std::array<double, 2> advection_velocity(AdvectionField field, const double* x) {
  switch (field) {
    case AdvectionField::a: return {1.0, 2.0};
    case AdvectionField::b: return {x[0] - 0.5, 0.5 - x[1]};
    case AdvectionField::c: return {x[1] - 0.5, 0.5 - x[0]};
  }
  return {0.0, 0.0};
}

/// Scalar advection with upwind numerical flux. Exterior boundary data is a
/// zero trace unless the caller overrides boundary_state.
inline Law advection_law(AdvectionField field) {
  Law law;
  law.dim = 2;
  law.n_c = 1;
  law.flux = [field](const double* u, const double* x, double* f) {
    const auto v = advection_velocity(field, x);
    f[0] = v[0] * u[0];
    f[1] = v[1] * u[0];
  };
  law.flux_jacobian = [field](const double*, const double* x, double* df) {
    const auto v = advection_velocity(field, x);
    df[0] = v[0];
    df[1] = v[1];
  };
  law.num_flux = [field](const double* um, const double* up, const double* n, const double* x, double* fhat) {
    const auto v = advection_velocity(field, x);
    const double vn = v[0] * n[0] + v[1] * n[1];
    fhat[0] = vn * (vn >= 0.0 ? um[0] : up[0]);
  };
  law.num_flux_jac_minus = [field](const double*, const double*, const double* n, const double* x, double* d) {
    const auto v = advection_velocity(field, x);
    d[0] = std::max(v[0] * n[0] + v[1] * n[1], 0.0);
  };
  law.num_flux_jac_plus = [field](const double*, const double*, const double* n, const double* x, double* d) {
    const auto v = advection_velocity(field, x);
    d[0] = std::min(v[0] * n[0] + v[1] * n[1], 0.0);
  };
  law.boundary_state = [](const double*, double, const double*, double* u_out) { u_out[0] = 0.0; };
  return law;
}

/// Constant-velocity scalar advection in three dimensions (the natural
/// extension of field (a); used by the 3D operator test matrix).
inline Law advection_law_3d(std::array<double, 3> vel) {
  Law law;
  law.dim = 3;
  law.n_c = 1;
  law.flux = [vel](const double* u, const double*, double* f) {
    for (int m = 0; m < 3; ++m) f[m] = vel[m] * u[0];
  };
  law.flux_jacobian = [vel](const double*, const double*, double* df) {
    for (int m = 0; m < 3; ++m) df[m] = vel[m];
  };
  law.num_flux = [vel](const double* um, const double* up, const double* n, const double*, double* fhat) {
    const double vn = vel[0] * n[0] + vel[1] * n[1] + vel[2] * n[2];
    fhat[0] = vn * (vn >= 0.0 ? um[0] : up[0]);
  };
  law.num_flux_jac_minus = [vel](const double*, const double*, const double* n, const double*, double* d) {
    d[0] = std::max(vel[0] * n[0] + vel[1] * n[1] + vel[2] * n[2], 0.0);
  };
  law.num_flux_jac_plus = [vel](const double*, const double*, const double* n, const double*, double* d) {
    d[0] = std::min(vel[0] * n[0] + vel[1] * n[1] + vel[2] * n[2], 0.0);
  };
  law.boundary_state = [](const double*, double, const double*, double* u_out) { u_out[0] = 0.0; };
  return law;
}

} // namespace tpdg
