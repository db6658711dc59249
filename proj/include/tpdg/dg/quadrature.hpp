#pragma once

#include <cmath>
#include <vector>

#include "tpdg/common/error.hpp"

namespace tpdg {

/// Legendre P_n(x) and its derivative on [-1, 1].
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  const double dp = (std::abs(x) < 1.0) ? n * (x * p1 - p0) / (x * x - 1.0)
                                        : 0.5 * n * (n + 1) * (x >= 1.0 ? 1.0 : (n % 2 ? 1.0 : -1.0));
  return {p1, dp};
}

struct Quadrature1D {
  std::vector<double> points;  // on [0, 1]
  std::vector<double> weights; // sum to 1
};

/// n-point Gauss-Legendre rule on [0, 1], exact for degree 2n - 1.
inline Quadrature1D gauss_rule(int n) {
  if (n < 1) throw ConfigError("gauss_rule: need at least one point");
  Quadrature1D q;
  q.points.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.points[i] = 0.5 * (1.0 - x); // cos ordering descends; mirror to ascend
    q.points[n - 1 - i] = 0.5 * (1.0 + x);
    q.weights[i] = 0.5 * w;
    q.weights[n - 1 - i] = 0.5 * w;
  }
  return q;
}

/// n-point Gauss-Lobatto rule on [0, 1] (endpoints included), exact for
/// degree 2n - 3.
inline Quadrature1D gauss_lobatto_rule(int n) {
  if (n < 2) throw ConfigError("gauss_lobatto_rule: need at least two points");
  const int m = n - 1;
  Quadrature1D q;
  q.points.resize(n);
  q.weights.resize(n);
  auto weight_at = [&](double x) {
    const auto [p, dp] = legendre(m, x);
    (void)dp;
    return 2.0 / (m * (m + 1) * p * p);
  };
  q.points[0] = 0.0;
  q.points[n - 1] = 1.0;
  q.weights[0] = q.weights[n - 1] = 0.5 * weight_at(-1.0);
  for (int i = 1; i < n - 1; ++i) {
    // Interior nodes are the roots of P'_{n-1}; Chebyshev-Lobatto guesses.
    double x = std::cos(M_PI * i / m);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(m, x);
      const double ddp = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.points[n - 1 - i] = 0.5 * (1.0 + x);
    q.weights[n - 1 - i] = 0.5 * weight_at(x);
  }
  return q;
}

/// Value of the j-th Lagrange basis polynomial for the given nodes.
inline double lagrange_value(const std::vector<double>& nodes, int j, double x) {
  double v = 1.0;
  for (int k = 0; k < int(nodes.size()); ++k) {
    if (k == j) continue;
    v *= (x - nodes[k]) / (nodes[j] - nodes[k]);
  }
  return v;
}

/// Derivative of the j-th Lagrange basis polynomial (sum-of-products form,
/// stable at and away from the nodes).
inline double lagrange_derivative(const std::vector<double>& nodes, int j, double x) {
  const int n = int(nodes.size());
  double denom = 1.0;
  for (int k = 0; k < n; ++k)
    if (k != j) denom *= nodes[j] - nodes[k];
  double sum = 0.0;
  for (int l = 0; l < n; ++l) {
    if (l == j) continue;
    double prod = 1.0;
    for (int k = 0; k < n; ++k)
      if (k != j && k != l) prod *= x - nodes[k];
    sum += prod;
  }
  return sum / denom;
}

} // namespace tpdg
