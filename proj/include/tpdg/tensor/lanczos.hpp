#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tpdg/tensor/kron.hpp"
#include "tpdg/tensor/shuffle.hpp"
#include "tpdg/tensor/svd_small.hpp"

namespace tpdg {

struct LanczosConfig {
  int requested_terms = 2;          // r
  int max_iterations = 0;           // J; 0 means 2r + 20
  double breakdown_tolerance = 1e-12;
  std::uint64_t seed = 0x5eedULL;   // start vector is seeded, so runs reproduce

  int effective_max_iterations() const {
    return max_iterations > 0 ? max_iterations : 2 * requested_terms + 20;
  }
  void validate() const {
    if (requested_terms < 1) throw ConfigError("LanczosConfig: requested_terms must be >= 1");
    if (breakdown_tolerance <= 0.0) throw ConfigError("LanczosConfig: breakdown_tolerance must be > 0");
    if (effective_max_iterations() < requested_terms)
      throw ConfigError("LanczosConfig: max_iterations must be >= requested_terms");
  }
};

/// r-term nearest-Kronecker-product approximation produced from the dominant
/// singular triplets of a shuffled operator.
struct KsvdResult {
  KroneckerSum factors;               // r terms, 2 factors each (m1 x n1, m2 x n2)
  std::vector<double> singular_values;
  bool converged = true;              // false when the iteration budget ran out
  int iterations = 0;
};

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Modified Gram-Schmidt against all columns in basis, with one refinement
/// pass.
inline void reorthogonalize(std::vector<double>& r, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) dot += q[i] * r[i];
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= dot * q[i];
    }
  }
}

inline std::vector<double> seeded_unit_vector(long n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (auto& x : v) x = dist(rng);
    nrm = norm2(v);
  }
  for (auto& x : v) x /= nrm;
  return v;
}

} // namespace detail

/// Golub-Kahan Lanczos bidiagonalization of the shuffled operator, with full
/// reorthogonalization of both vector sequences, followed by the SVD of the
/// small bidiagonal matrix. The r dominant triplets are reshaped into
/// Kronecker factors via vec(A_j) = sqrt(sigma_j) u_j, vec(B_j) =
/// sqrt(sigma_j) v_j (column-stacked vec).
///
/// A zero operator yields zero factors with sigma = 0. If the iteration
/// budget is exhausted before breakdown, the best available triplets are
/// returned with converged = false.
inline KsvdResult lanczos_ksvd(const ShuffledOperator& op, const LanczosConfig& cfg) {
  cfg.validate();
  if (!op.apply || !op.apply_transpose) throw ConfigError("lanczos_ksvd: operator actions not set");
  const long nrows = op.rows();
  const long ncols = op.cols();
  const int r = cfg.requested_terms;
  const int max_iter = cfg.effective_max_iterations();
  const long max_rank = std::min(nrows, ncols);

  auto make_zero_result = [&](bool converged) {
    KsvdResult res;
    res.converged = converged;
    res.singular_values.assign(r, 0.0);
    for (int j = 0; j < r; ++j)
      res.factors.terms.push_back({SmallMatrix(op.m1, op.n1), SmallMatrix(op.m2, op.n2)});
    return res;
  };

  std::vector<std::vector<double>> vs, us; // right / left Lanczos vectors
  std::vector<double> alphas, betas;       // diagonal / superdiagonal of B

  vs.push_back(detail::seeded_unit_vector(ncols, cfg.seed));
  std::vector<double> work(nrows);

  // First left vector: alpha_0 u_1 = Atilde v_0.
  op.apply(vs[0], work);
  double alpha = detail::norm2(work);
  const double tol = cfg.breakdown_tolerance * std::max(alpha, 1e-300);
  if (alpha < 1e-300) return make_zero_result(true); // zero operator
  for (auto& x : work) x /= alpha;
  us.push_back(work);
  alphas.push_back(alpha);

  // Breakdown (a vanishing beta or alpha after full reorthogonalization)
  // terminates the recurrence naturally once either basis is exhausted, so
  // only the iteration budget caps the loop.
  bool broke_down = false;
  int iters = 1;
  std::vector<double> p(ncols), rvec(nrows);
  while (int(alphas.size()) < max_iter) {
    // beta_j v_j = Atilde^T u_j - alpha_{j-1} v_{j-1}
    op.apply_transpose(us.back(), p);
    for (long i = 0; i < ncols; ++i) p[i] -= alphas.back() * vs.back()[i];
    detail::reorthogonalize(p, vs);
    const double beta = detail::norm2(p);
    ++iters;
    if (beta < tol) {
      broke_down = true;
      break;
    }
    for (auto& x : p) x /= beta;
    vs.push_back(p);
    betas.push_back(beta);

    // alpha_j u_{j+1} = Atilde v_j - beta_j u_j
    op.apply(vs.back(), rvec);
    for (long i = 0; i < nrows; ++i) rvec[i] -= beta * us.back()[i];
    detail::reorthogonalize(rvec, us);
    alpha = detail::norm2(rvec);
    if (alpha < tol) {
      broke_down = true;
      break;
    }
    for (auto& x : rvec) x /= alpha;
    us.push_back(rvec);
    alphas.push_back(alpha);
  }

  // Bidiagonal B with diagonal alphas and superdiagonal betas. An
  // alpha-breakdown leaves one more v than u, making B rectangular.
  const int ku = int(us.size());
  const int kv = int(vs.size());
  SmallMatrix b(ku, kv);
  for (int i = 0; i < ku; ++i) {
    b(i, i) = alphas[i];
    if (i + 1 < kv && i < int(betas.size())) b(i, i + 1) = betas[i];
  }
  const SvdResult bsvd = svd_small(b);
  const int k = int(bsvd.sigma.size());

  KsvdResult res;
  res.iterations = iters;
  res.converged = broke_down || long(ku) >= max_rank;
  const int terms = r;
  res.singular_values.assign(terms, 0.0);
  for (int j = 0; j < terms; ++j) {
    SmallMatrix aj(op.m1, op.n1), bj(op.m2, op.n2);
    if (j < k && bsvd.sigma[j] > 0.0) {
      res.singular_values[j] = bsvd.sigma[j];
      const double scale = std::sqrt(bsvd.sigma[j]);
      // Left singular vector of Atilde: U * ub_j, column-stacked into m1 x n1.
      for (long i = 0; i < nrows; ++i) {
        double s = 0.0;
        for (int l = 0; l < ku; ++l) s += us[l][i] * bsvd.u(l, j);
        aj(int(i % op.m1), int(i / op.m1)) = scale * s;
      }
      for (long i = 0; i < ncols; ++i) {
        double s = 0.0;
        for (int l = 0; l < kv; ++l) s += vs[l][i] * bsvd.v(l, j);
        bj(int(i % op.m2), int(i / op.m2)) = scale * s;
      }
    }
    res.factors.terms.push_back({std::move(aj), std::move(bj)});
  }
  return res;
}

} // namespace tpdg
