#pragma once

#include <functional>

#include "tpdg/common/error.hpp"

namespace tpdg {

/// Conservation-law descriptor: fluxes, their state Jacobians, the numerical
/// flux with its trace derivatives, and optional closed-form solution /
/// boundary data. Layouts:
///   flux:            F[dir * n_c + c]
///   flux_jacobian:   dF[(dir * n_c + r) * n_c + c] = dF_dir,r / du_c
///   num_flux:        fhat[c]
///   num_flux_jac_*:  d[r * n_c + c]
struct Law {
  int dim = 2;
  int n_c = 1;

  std::function<void(const double* u, const double* x, double* f)> flux;
  std::function<void(const double* u, const double* x, double* df)> flux_jacobian;
  std::function<void(const double* um, const double* up, const double* n, const double* x, double* fhat)>
      num_flux;
  std::function<void(const double* um, const double* up, const double* n, const double* x, double* d)>
      num_flux_jac_minus;
  std::function<void(const double* um, const double* up, const double* n, const double* x, double* d)>
      num_flux_jac_plus;

  /// Closed-form state, when the case has one. Null otherwise.
  std::function<void(const double* x, double t, double* u)> exact;
  /// Exterior trace for boundary faces (tag != 0).
  std::function<void(const double* x, double t, const double* u_in, double* u_out)> boundary_state;

  void validate() const {
    if (dim != 2 && dim != 3) throw ConfigError("Law: dim must be 2 or 3");
    if (n_c < 1) throw ConfigError("Law: n_c must be >= 1");
    if (!flux || !flux_jacobian || !num_flux || !num_flux_jac_minus || !num_flux_jac_plus)
      throw ConfigError("Law: missing required callbacks");
  }
};

} // namespace tpdg
