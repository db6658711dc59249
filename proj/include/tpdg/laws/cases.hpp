#pragma once

#include <cmath>

#include "tpdg/laws/advection.hpp"
#include "tpdg/laws/euler.hpp"

namespace tpdg {

/// Unsteady isentropic vortex advecting with the free stream across a
/// 20 x 15 rectangle; the exact solution doubles as initial and far-field
/// boundary data.
struct EulerVortexCase {
  double gamma = 1.4;
  double mach = 0.5;
  double u_inf = 1.0;
  double theta = std::atan2(1.0, 2.0);
  double epsilon = 0.3;
  double r_c = 1.5;
  double x0 = 5.0, y0 = 5.0;
  double rho_inf = 1.0;

  double p_inf() const {
    const double c_inf = u_inf / mach;
    return rho_inf * c_inf * c_inf / gamma;
  }

  void exact_state(const double* x, double t, double* u) const {
    const double ubar = u_inf * std::cos(theta);
    const double vbar = u_inf * std::sin(theta);
    const double dx = (x[0] - x0) - ubar * t;
    const double dy = (x[1] - y0) - vbar * t;
    const double f = (1.0 - dx * dx - dy * dy) / (r_c * r_c);
    const double ef2 = std::exp(0.5 * f);
    const double vel_u = u_inf * (std::cos(theta) - epsilon * dy * ef2 / (2.0 * M_PI * r_c));
    const double vel_v = u_inf * (std::sin(theta) + epsilon * dx * ef2 / (2.0 * M_PI * r_c));
    const double common =
        1.0 - epsilon * epsilon * (gamma - 1.0) * mach * mach * std::exp(f) / (8.0 * M_PI * M_PI);
    const double rho = rho_inf * std::pow(common, 1.0 / (gamma - 1.0));
    const double p = p_inf() * std::pow(common, gamma / (gamma - 1.0));
    u[0] = rho;
    u[1] = rho * vel_u;
    u[2] = rho * vel_v;
    u[3] = p / (gamma - 1.0) + 0.5 * rho * (vel_u * vel_u + vel_v * vel_v);
  }

  /// Euler law with the exact solution attached and far-field boundary data
  /// imposed through the numerical flux's exterior trace.
  Law law() const {
    Law l = euler_law(2, gamma);
    EulerVortexCase self = *this;
    l.exact = [self](const double* x, double t, double* u) { self.exact_state(x, t, u); };
    l.boundary_state = [self](const double* x, double t, const double*, double* u_out) {
      self.exact_state(x, t, u_out);
    };
    return l;
  }
};

/// Smooth density wave on the periodic cube [0, 2]^3: velocity and pressure
/// stay constant, the density profile advects with u + v + w.
struct PeriodicEuler3DCase {
  double gamma = 1.4;
  double vel[3] = {1.0, -0.5, 1.0};
  double p0 = 1.0;

  void exact_state(const double* x, double t, double* u) const {
    const double phase = x[0] + x[1] + x[2] - t * (vel[0] + vel[1] + vel[2]);
    const double rho = 1.0 + 0.2 * std::sin(M_PI * phase);
    u[0] = rho;
    double ke = 0.0;
    for (int m = 0; m < 3; ++m) {
      u[1 + m] = rho * vel[m];
      ke += vel[m] * vel[m];
    }
    u[4] = p0 / (gamma - 1.0) + 0.5 * rho * ke;
  }

  Law law() const {
    Law l = euler_law(3, gamma);
    PeriodicEuler3DCase self = *this;
    l.exact = [self](const double* x, double t, double* u) { self.exact_state(x, t, u); };
    return l;
  }
};

/// Advection test case: Gaussian bump initial data with zero-inflow
/// boundaries on [0, 1]^2.
struct AdvectionCase {
  AdvectionField field = AdvectionField::a;

  double initial(const double* x) const {
    const double dx = x[0] - 0.5, dy = x[1] - 0.5;
    return std::exp(-(dx * dx + dy * dy) / 0.045);
  }

  Law law() const { return advection_law(field); }
};

} // namespace tpdg
