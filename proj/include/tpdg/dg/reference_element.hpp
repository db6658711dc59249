#pragma once

#include <vector>

#include "tpdg/dg/quadrature.hpp"
#include "tpdg/tensor/small_matrix.hpp"

namespace tpdg {

enum class QuadratureKind { gauss, gauss_lobatto };

/// One-dimensional nodal machinery generating every tensor-product operator:
/// Gauss-Lobatto nodes on [0, 1], a quadrature rule, the point-evaluation
/// matrix G, the differentiation matrix D, and the diagonal weights W.
struct ReferenceElement {
  int p = 1;                     // polynomial degree
  int mu = 0;                    // quadrature points per direction
  QuadratureKind quadrature = QuadratureKind::gauss;

  std::vector<double> nodes;     // p + 1 nodal points (Gauss-Lobatto)
  std::vector<double> qpoints;   // mu
  std::vector<double> qweights;  // mu, sum to 1

  SmallMatrix g;   // mu x (p+1), G(a, j)  = phi_j(x_a)
  SmallMatrix d;   // mu x (p+1), D(a, j)  = phi_j'(x_a)
  SmallMatrix gw;  // (p+1) x mu, G^T W
  SmallMatrix dw;  // (p+1) x mu, D^T W

  // Collocation objects for the under-integrated mass inverse: p + 1 Gauss
  // points so that Ghat is square and invertible.
  std::vector<double> cpoints, cweights;
  SmallMatrix ghat;       // (p+1) x (p+1)
  LuFactor ghat_lu;       // LU of Ghat
  LuFactor ghat_tw_lu;    // LU of Ghat^T What

  int nodes_per_dim() const { return p + 1; }

  double basis_value(int j, double x) const { return lagrange_value(nodes, j, x); }
  double basis_derivative(int j, double x) const { return lagrange_derivative(nodes, j, x); }
};

/// Assemble the reference element. mu = 0 picks the default p + 2 points.
inline ReferenceElement build_reference(int p, QuadratureKind kind = QuadratureKind::gauss, int mu = 0) {
  if (p < 1) throw ConfigError("build_reference: degree must be >= 1");
  if (mu == 0) mu = p + 2;
  if (mu < p + 1) throw ConfigError("build_reference: need at least p + 1 quadrature points");

  ReferenceElement ref;
  ref.p = p;
  ref.mu = mu;
  ref.quadrature = kind;
  ref.nodes = gauss_lobatto_rule(p + 1).points;

  const Quadrature1D quad = (kind == QuadratureKind::gauss) ? gauss_rule(mu) : gauss_lobatto_rule(mu);
  ref.qpoints = quad.points;
  ref.qweights = quad.weights;

  const int n = p + 1;
  ref.g = SmallMatrix(mu, n);
  ref.d = SmallMatrix(mu, n);
  ref.gw = SmallMatrix(n, mu);
  ref.dw = SmallMatrix(n, mu);
  for (int a = 0; a < mu; ++a)
    for (int j = 0; j < n; ++j) {
      ref.g(a, j) = ref.basis_value(j, ref.qpoints[a]);
      ref.d(a, j) = ref.basis_derivative(j, ref.qpoints[a]);
      ref.gw(j, a) = ref.g(a, j) * ref.qweights[a];
      ref.dw(j, a) = ref.d(a, j) * ref.qweights[a];
    }

  const Quadrature1D colloc = gauss_rule(n);
  ref.cpoints = colloc.points;
  ref.cweights = colloc.weights;
  ref.ghat = SmallMatrix(n, n);
  SmallMatrix ghat_tw(n, n);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j) {
      ref.ghat(a, j) = ref.basis_value(j, ref.cpoints[a]);
      ghat_tw(j, a) = ref.ghat(a, j) * ref.cweights[a];
    }
  ref.ghat_lu = LuFactor(ref.ghat);
  ref.ghat_tw_lu = LuFactor(ghat_tw);
  return ref;
}

} // namespace tpdg
