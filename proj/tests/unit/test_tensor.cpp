#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "support/test_rng.hpp"
#include "tpdg/tensor/kron.hpp"
#include "tpdg/tensor/lanczos.hpp"
#include "tpdg/tensor/schur.hpp"
#include "tpdg/tensor/shuffle.hpp"
#include "tpdg/tensor/small_matrix.hpp"
#include "tpdg/tensor/svd_small.hpp"
#include "tpdg/tensor/sylvester.hpp"

using namespace tpdg;
using namespace tpdg::test;

namespace {

std::vector<double> dense_apply(const SmallMatrix& m, const std::vector<double>& v) {
  std::vector<double> y(m.rows());
  matvec(m, v, y);
  return y;
}

SmallMatrix random_quasi_triangular(std::mt19937_64& rng, int n) {
  SmallMatrix t = random_matrix(rng, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) t(i, j) = 0.0;
  // Plant 2x2 complex-pair blocks on the diagonal: equal diagonals, b*c < 0.
  std::uniform_real_distribution<double> dist(0.2, 1.0);
  for (int i = 0; i + 1 < n; i += 3) {
    const double d = dist(rng);
    t(i, i) = d;
    t(i + 1, i + 1) = d;
    t(i, i + 1) = dist(rng);
    t(i + 1, i) = -dist(rng);
  }
  return t;
}

} // namespace

TEST_CASE("kron_apply identity term") {
  KroneckerSum op;
  op.terms.push_back({SmallMatrix::identity(2), SmallMatrix::identity(2)});
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(kron_apply(op, v) == v);
}

TEST_CASE("kron_apply diagonal outer factor") {
  SmallMatrix d(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  KroneckerSum op;
  op.terms.push_back({d, SmallMatrix::identity(2)});
  const std::vector<double> v{1, 1, 1, 1};
  const auto y = kron_apply(op, v);
  // Dense oracle confirms the frozen expectation (1, 1, 2, 2).
  const auto want = dense_apply(materialize(op), v);
  CHECK(max_abs_diff(y, want) == 0.0);
  CHECK(y == std::vector<double>{1, 1, 2, 2});
}

TEST_CASE("kron_apply 3d random terms match dense oracle") {
  auto rng = make_rng(101);
  KroneckerSum op;
  for (int t = 0; t < 2; ++t)
    op.terms.push_back({random_matrix(rng, 3, 3), random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)});
  const auto v = random_vector(rng, 27);
  const auto got = kron_apply(op, v);
  const auto want = dense_apply(materialize(op), v);
  REQUIRE(norm2(want) > 0.0);
  CHECK(max_abs_diff(got, want) <= 1e-13 * norm2(want));
}

TEST_CASE("kron_apply property: random shapes vs dense oracle") {
  auto rng = make_rng(7);
  std::uniform_int_distribution<int> dim_dist(2, 3);
  std::uniform_int_distribution<int> r_dist(1, 3);
  std::uniform_int_distribution<int> sz(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = dim_dist(rng);
    const int r = r_dist(rng);
    std::vector<int> rows(d), cols(d);
    for (int k = 0; k < d; ++k) {
      rows[k] = sz(rng);
      cols[k] = sz(rng);
    }
    KroneckerSum op;
    for (int t = 0; t < r; ++t) {
      std::vector<SmallMatrix> term;
      for (int k = 0; k < d; ++k) term.push_back(random_matrix(rng, rows[k], cols[k]));
      op.terms.push_back(std::move(term));
    }
    const auto v = random_vector(rng, std::size_t(op.cols()));
    const auto got = kron_apply(op, v);
    const auto want = dense_apply(materialize(op), v);
    const double scale = std::max(1.0, norm2(want));
    CHECK(max_abs_diff(got, want) <= 1e-12 * scale);
  }
}

TEST_CASE("kron_apply rejects bad input length") {
  KroneckerSum op;
  op.terms.push_back({SmallMatrix::identity(2), SmallMatrix::identity(2)});
  CHECK_THROWS_AS(kron_apply(op, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("shuffle_dense of a pure Kronecker product is rank one") {
  auto rng = make_rng(11);
  const SmallMatrix a1 = random_matrix(rng, 2, 2);
  const SmallMatrix b1 = random_matrix(rng, 3, 3);
  const SmallMatrix a = kron_dense(a1, b1);
  const SmallMatrix at = shuffle_dense(a, 2, 2, 3, 3);
  // Atilde == vec(A1) vec(B1)^T entry by entry (column-stacked vec).
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          CHECK(at(j * 2 + i, c * 3 + r) == Catch::Approx(a1(i, j) * b1(r, c)).margin(1e-15));
  const auto sv = singular_values_oracle(at);
  // The Gram-matrix oracle resolves tiny singular values only to ~sqrt(eps).
  CHECK(sv[1] <= 1e-7 * sv[0]);
}

TEST_CASE("shuffle_dense of I4 blocked 2|2") {
  const SmallMatrix at = shuffle_dense(SmallMatrix::identity(4), 2, 2, 2, 2);
  int nonzero = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (at(i, j) != 0.0) {
        ++nonzero;
        CHECK(at(i, j) == 1.0);
      }
  CHECK(nonzero == 4);
  const auto sv = singular_values_oracle(at);
  CHECK(sv[0] == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(sv[1] <= 1e-12);
}

TEST_CASE("shuffle round-trip is exact and an isometry") {
  auto rng = make_rng(13);
  for (auto [m1, n1, m2, n2] : {std::array{2, 3, 4, 2}, std::array{3, 3, 3, 3}, std::array{1, 4, 5, 2}}) {
    const SmallMatrix a = random_matrix(rng, m1 * m2, n1 * n2);
    const SmallMatrix at = shuffle_dense(a, m1, n1, m2, n2);
    // Entries are permuted exactly; the norm accumulates them in a different
    // order, so allow summation roundoff.
    CHECK(at.frobenius_norm() == Catch::Approx(a.frobenius_norm()).epsilon(1e-15));
    const SmallMatrix back = unshuffle_dense(at, m1, n1, m2, n2);
    CHECK(frob_dist(back, a) == 0.0);
  }
}

TEST_CASE("shuffle_dense rejects non-factorable shapes") {
  CHECK_THROWS_AS(shuffle_dense(SmallMatrix::identity(4), 2, 2, 3, 2), ShapeError);
}

TEST_CASE("svd_small reproduces singular values of random matrices") {
  auto rng = make_rng(17);
  for (auto [m, n] : {std::array{5, 5}, std::array{8, 3}, std::array{3, 8}}) {
    const SmallMatrix a = random_matrix(rng, m, n);
    const auto svd = svd_small(a);
    const auto want = singular_values_oracle(a);
    for (std::size_t k = 0; k < want.size(); ++k)
      CHECK(svd.sigma[k] == Catch::Approx(want[k]).margin(1e-10));
    // Reconstruction.
    SmallMatrix rec(m, n);
    for (int k = 0; k < int(svd.sigma.size()); ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) rec(i, j) += svd.sigma[k] * svd.u(i, k) * svd.v(j, k);
    CHECK(frob_dist(rec, a) <= 1e-12 * a.frobenius_norm());
  }
}

TEST_CASE("lanczos_ksvd recovers an exact rank-one Kronecker product") {
  auto rng = make_rng(19);
  const SmallMatrix a1 = random_matrix(rng, 3, 3);
  const SmallMatrix b1 = random_matrix(rng, 4, 4);
  const SmallMatrix a = kron_dense(a1, b1);
  const auto op = make_dense_shuffled_operator(shuffle_dense(a, 3, 3, 4, 4), 3, 3, 4, 4);
  LanczosConfig cfg;
  cfg.requested_terms = 1;
  const auto res = lanczos_ksvd(op, cfg);
  REQUIRE(res.converged);
  const SmallMatrix rec = materialize(res.factors);
  CHECK(frob_dist(rec, a) <= 1e-10 * a.frobenius_norm());
}

TEST_CASE("lanczos_ksvd matches dense truncation error on a random 16x16") {
  auto rng = make_rng(23);
  const SmallMatrix a = random_matrix(rng, 16, 16);
  const SmallMatrix at = shuffle_dense(a, 4, 4, 4, 4);
  const auto op = make_dense_shuffled_operator(at, 4, 4, 4, 4);
  LanczosConfig cfg;
  cfg.requested_terms = 2;
  const auto res = lanczos_ksvd(op, cfg);
  const SmallMatrix rec = materialize(res.factors);
  const double err2 = std::pow(frob_dist(rec, a), 2);
  const auto sv = singular_values_oracle(at);
  double want2 = 0.0;
  for (std::size_t j = 2; j < sv.size(); ++j) want2 += sv[j] * sv[j];
  CHECK(err2 == Catch::Approx(want2).epsilon(1e-8));
}

TEST_CASE("lanczos_ksvd on identity recovers I2 x I2") {
  const SmallMatrix a = SmallMatrix::identity(4);
  const auto op = make_dense_shuffled_operator(shuffle_dense(a, 2, 2, 2, 2), 2, 2, 2, 2);
  LanczosConfig cfg;
  cfg.requested_terms = 1;
  const auto res = lanczos_ksvd(op, cfg);
  const SmallMatrix rec = materialize(res.factors);
  CHECK(frob_dist(rec, a) <= 1e-13);
}

TEST_CASE("lanczos_ksvd with full rank reconstructs the matrix") {
  auto rng = make_rng(29);
  for (auto [m1, n1, m2, n2] : {std::array{3, 3, 4, 4}, std::array{6, 6, 6, 6}, std::array{2, 3, 6, 4}}) {
    const SmallMatrix a = random_matrix(rng, m1 * m2, n1 * n2);
    const SmallMatrix at = shuffle_dense(a, m1, n1, m2, n2);
    const auto op = make_dense_shuffled_operator(at, m1, n1, m2, n2);
    LanczosConfig cfg;
    cfg.requested_terms = int(std::min(long(m1) * n1, long(m2) * n2));
    cfg.max_iterations = 3 * cfg.requested_terms + 20;
    const auto res = lanczos_ksvd(op, cfg);
    const SmallMatrix rec = materialize(res.factors);
    CHECK(frob_dist(rec, a) <= 1e-8 * a.frobenius_norm());
  }
}

TEST_CASE("lanczos_ksvd r=2 is Frobenius optimal") {
  auto rng = make_rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const SmallMatrix a = random_matrix(rng, 12, 12);
    const SmallMatrix at = shuffle_dense(a, 3, 4, 4, 3);
    const auto op = make_dense_shuffled_operator(at, 3, 4, 4, 3);
    LanczosConfig cfg;
    cfg.requested_terms = 2;
    const auto res = lanczos_ksvd(op, cfg);
    const double err = frob_dist(materialize(res.factors), a);
    const auto sv = singular_values_oracle(at);
    double trunc2 = 0.0;
    for (std::size_t j = 2; j < sv.size(); ++j) trunc2 += sv[j] * sv[j];
    CHECK(err <= (1.0 + 1e-6) * std::sqrt(trunc2) + 1e-14);
  }
}

TEST_CASE("lanczos_ksvd flags non-convergence at the iteration cap") {
  auto rng = make_rng(307);
  const SmallMatrix a = random_matrix(rng, 16, 16);
  const auto op = make_dense_shuffled_operator(shuffle_dense(a, 4, 4, 4, 4), 4, 4, 4, 4);
  LanczosConfig cfg;
  cfg.requested_terms = 2;
  cfg.max_iterations = 2; // far below the rank; no breakdown possible
  const auto res = lanczos_ksvd(op, cfg);
  CHECK(!res.converged);
  CHECK(res.singular_values.size() == 2);
}

TEST_CASE("lanczos config validation") {
  LanczosConfig cfg;
  cfg.requested_terms = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.requested_terms = 3;
  cfg.max_iterations = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.max_iterations = 0;
  cfg.breakdown_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("lanczos_ksvd zero operator returns zero factors") {
  const auto op = make_dense_shuffled_operator(SmallMatrix(6, 6), 3, 2, 2, 3);
  LanczosConfig cfg;
  cfg.requested_terms = 2;
  const auto res = lanczos_ksvd(op, cfg);
  CHECK(res.converged);
  CHECK(res.singular_values == std::vector<double>{0.0, 0.0});
  CHECK(materialize(res.factors).frobenius_norm() == 0.0);
}

TEST_CASE("real_schur of a diagonal matrix") {
  SmallMatrix c(3, 3);
  c(0, 0) = 3.0;
  c(1, 1) = -1.0;
  c(2, 2) = 0.5;
  const auto [q, t] = real_schur(c);
  for (int i = 1; i < 3; ++i)
    for (int j = 0; j < i; ++j) CHECK(std::abs(t(i, j)) <= 1e-14);
  const SmallMatrix rec = matmul(matmul(q, t), q.transposed());
  CHECK(frob_dist(rec, c) <= 1e-12);
  std::vector<double> diag{t(0, 0), t(1, 1), t(2, 2)};
  std::sort(diag.begin(), diag.end());
  CHECK(diag == std::vector<double>{-1.0, 0.5, 3.0});
}

TEST_CASE("real_schur of a symmetric matrix matches bisection eigenvalues") {
  auto rng = make_rng(37);
  SmallMatrix c = random_matrix(rng, 5, 5);
  c += c.transposed();
  const auto [q, t] = real_schur(c);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) CHECK(std::abs(t(i, j)) <= 1e-10 * c.frobenius_norm());
  std::vector<double> eig(5);
  for (int i = 0; i < 5; ++i) eig[i] = t(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  const auto want = symmetric_eigenvalues_bisection(c);
  for (int i = 0; i < 5; ++i) CHECK(eig[i] == Catch::Approx(want[i]).margin(1e-9));
}

TEST_CASE("real_schur of a rotation keeps the complex pair in a 2x2 block") {
  SmallMatrix c(2, 2);
  c(0, 1) = -1.0;
  c(1, 0) = 1.0;
  const auto [q, t] = real_schur(c);
  CHECK(t(1, 0) != 0.0);
  std::vector<double> re, im;
  quasi_triangular_eigenvalues(t, re, im);
  CHECK(re[0] == Catch::Approx(0.0).margin(1e-14));
  CHECK(std::abs(im[0]) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("real_schur invariants on random matrices") {
  auto rng = make_rng(41);
  for (int n : {2, 3, 5, 8, 13, 21}) {
    const SmallMatrix c = random_matrix(rng, n, n);
    const auto [q, t] = real_schur(c);
    // Orthogonality.
    const SmallMatrix qtq = matmul(q.transposed(), q);
    CHECK(frob_dist(qtq, SmallMatrix::identity(n)) <= 1e-12 * n);
    // Factorization residual.
    CHECK(frob_dist(matmul(matmul(q, t), q.transposed()), c) <= 1e-10 * c.frobenius_norm());
    // Quasi-triangular with standardized 2x2 blocks.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j + 2 <= i; ++j) CHECK(t(i, j) == 0.0);
    for (int i = 0; i + 1 < n; ++i)
      if (t(i + 1, i) != 0.0) {
        CHECK(t(i, i) == Catch::Approx(t(i + 1, i + 1)).margin(1e-9 * c.frobenius_norm()));
        CHECK(t(i, i + 1) * t(i + 1, i) < 0.0);
        if (i + 2 < n) CHECK(t(i + 2, i + 1) == 0.0);
      }
  }
}

TEST_CASE("real_schur applied twice preserves the eigenvalues") {
  auto rng = make_rng(43);
  const SmallMatrix c = random_matrix(rng, 7, 7);
  const auto first = real_schur(c);
  const auto second = real_schur(first.t);
  std::vector<double> re1, im1, re2, im2;
  quasi_triangular_eigenvalues(first.t, re1, im1);
  quasi_triangular_eigenvalues(second.t, re2, im2);
  auto key = [](double re, double im) { return std::make_pair(re, std::abs(im)); };
  std::vector<std::pair<double, double>> k1, k2;
  for (std::size_t i = 0; i < re1.size(); ++i) {
    k1.push_back(key(re1[i], im1[i]));
    k2.push_back(key(re2[i], im2[i]));
  }
  std::sort(k1.begin(), k1.end());
  std::sort(k2.begin(), k2.end());
  for (std::size_t i = 0; i < k1.size(); ++i) {
    CHECK(k1[i].first == Catch::Approx(k2[i].first).margin(1e-9));
    CHECK(k1[i].second == Catch::Approx(k2[i].second).margin(1e-9));
  }
}

TEST_CASE("sylvester_solve with T1 = 0 decouples the rows") {
  auto rng = make_rng(47);
  const SmallMatrix t1(3, 3);
  SmallMatrix t2 = random_quasi_triangular(rng, 4);
  for (int i = 0; i < 4; ++i) t2(i, i) += 3.0; // keep it nonsingular
  const SmallMatrix b = random_matrix(rng, 3, 4);
  const SmallMatrix x = sylvester_solve(t1, t2, b);
  // Each row solves (T2 + 0) x_i^T = b_i^T.
  for (int i = 0; i < 3; ++i) {
    std::vector<double> want(4);
    for (int k = 3; k >= 0; --k) {
      double s = b(i, k);
      for (int l = k + 1; l < 4; ++l) s -= t2(k, l) * want[l];
      // no 2x2 blocks planted below: t2 from random_quasi_triangular may have
      // them, so verify by residual instead of explicit substitution
      want[k] = s / t2(k, k);
    }
    (void)want;
    std::vector<double> res(4, 0.0);
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) res[k] += t2(k, l) * x(i, l);
    for (int k = 0; k < 4; ++k) CHECK(res[k] == Catch::Approx(b(i, k)).margin(1e-11));
  }
}

TEST_CASE("sylvester_solve diagonal case") {
  SmallMatrix t1(2, 2), t2(3, 3);
  t1(0, 0) = 1.0;
  t1(1, 1) = 2.0;
  t2(0, 0) = 3.0;
  t2(1, 1) = 4.0;
  t2(2, 2) = 5.0;
  SmallMatrix b(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = 1.0 + i + 2 * j;
  const SmallMatrix x = sylvester_solve(t1, t2, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(x(i, j) == Catch::Approx(b(i, j) / (t1(i, i) + t2(j, j))).epsilon(1e-14));
}

TEST_CASE("sylvester_solve matches dense Kronecker-sum oracle") {
  auto rng = make_rng(53);
  const SmallMatrix t1 = random_quasi_triangular(rng, 6);
  const SmallMatrix t2 = random_quasi_triangular(rng, 5);
  const SmallMatrix b = random_matrix(rng, 6, 5);
  const SmallMatrix x = sylvester_solve(t1, t2, b);
  // Dense oracle: (T1 (x) I + I (x) T2) vec_rowmajor(X) = vec_rowmajor(B).
  const SmallMatrix k = kron_dense(t1, SmallMatrix::identity(5)) + kron_dense(SmallMatrix::identity(6), t2);
  std::vector<double> vx(30), want(30);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j) vx[i * 5 + j] = b(i, j);
  LuFactor lu(k);
  lu.solve(vx, want);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j) CHECK(x(i, j) == Catch::Approx(want[i * 5 + j]).margin(1e-10));
}

TEST_CASE("sylvester_solve reports singular eigenvalue pairs") {
  SmallMatrix t1(2, 2), t2(2, 2);
  t1(0, 0) = 1.0;
  t1(1, 1) = 2.0;
  t2(0, 0) = -1.0; // lambda(T1) + lambda(T2) = 0
  t2(1, 1) = 5.0;
  SmallMatrix b(2, 2);
  b(0, 0) = 1.0;
  CHECK_THROWS_AS(sylvester_solve(t1, t2, b), SingularError);
}

TEST_CASE("lu_factor examples and residuals") {
  LuFactor id(SmallMatrix::identity(3));
  std::vector<double> b{1, 2, 3}, x(3);
  id.solve(b, x);
  CHECK(x == b);

  SmallMatrix d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  LuFactor lud(d);
  std::vector<double> b2{2, 4}, x2(2);
  lud.solve(b2, x2);
  CHECK(x2 == std::vector<double>{1.0, 1.0});

  auto rng = make_rng(59);
  const SmallMatrix a = random_matrix(rng, 8, 8);
  LuFactor lua(a);
  const auto rhs = random_vector(rng, 8);
  std::vector<double> sol(8), res(8);
  lua.solve(rhs, sol);
  matvec(a, sol, res);
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < 8; ++i) {
    err += (res[i] - rhs[i]) * (res[i] - rhs[i]);
    scale += rhs[i] * rhs[i];
  }
  CHECK(std::sqrt(err) <= 1e-12 * std::sqrt(scale));

  // Transpose solve.
  std::vector<double> solt(8), rest(8);
  lua.solve_transpose(rhs, solt);
  matvec_transpose(a, solt, rest);
  CHECK(max_abs_diff(rest, rhs) <= 1e-11);

  SmallMatrix sing(2, 2);
  sing(0, 0) = 1.0;
  sing(0, 1) = 1.0;
  sing(1, 0) = 1.0;
  sing(1, 1) = 1.0;
  CHECK_THROWS_AS(LuFactor(sing), SingularError);
}
