#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/test_rng.hpp"
#include "tpdg/dg/faces.hpp"
#include "tpdg/dg/mesh.hpp"
#include "tpdg/dg/mesh_io.hpp"
#include "tpdg/dg/reference_element.hpp"
#include "tpdg/tensor/kron.hpp"

using namespace tpdg;
using namespace tpdg::test;

TEST_CASE("gauss rule exactness") {
  for (int n : {1, 2, 3, 5, 8, 13}) {
    const auto q = gauss_rule(n);
    double wsum = 0.0;
    for (double w : q.weights) wsum += w;
    CHECK(wsum == Catch::Approx(1.0).margin(1e-14));
    // Exact for x^(2n-1) on [0, 1].
    const int deg = 2 * n - 1;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) integral += q.weights[i] * std::pow(q.points[i], deg);
    CHECK(integral == Catch::Approx(1.0 / (deg + 1)).margin(1e-13));
  }
}

TEST_CASE("gauss lobatto rule includes endpoints and is exact to 2n-3") {
  for (int n : {2, 3, 4, 7, 11}) {
    const auto q = gauss_lobatto_rule(n);
    CHECK(q.points.front() == 0.0);
    CHECK(q.points.back() == 1.0);
    const int deg = 2 * n - 3;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) integral += q.weights[i] * std::pow(q.points[i], deg);
    CHECK(integral == Catch::Approx(1.0 / (deg + 1)).margin(1e-13));
  }
}

TEST_CASE("build_reference p=1 with two Gauss points") {
  const auto ref = build_reference(1, QuadratureKind::gauss, 2);
  CHECK(ref.nodes == std::vector<double>{0.0, 1.0});
  CHECK(ref.qpoints[0] == Catch::Approx((3.0 - std::sqrt(3.0)) / 6.0).margin(1e-15));
  CHECK(ref.qpoints[1] == Catch::Approx((3.0 + std::sqrt(3.0)) / 6.0).margin(1e-15));
  CHECK(ref.qweights[0] == Catch::Approx(0.5).margin(1e-15));
  CHECK(ref.qweights[1] == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("reference element invariants") {
  for (int p : {1, 2, 3, 5, 8}) {
    const auto ref = build_reference(p);
    const int n = p + 1;
    // Nodal property.
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        CHECK(ref.basis_value(j, ref.nodes[k]) == Catch::Approx(j == k ? 1.0 : 0.0).margin(1e-12));
    // Unit measure.
    double wsum = 0.0;
    for (double w : ref.qweights) wsum += w;
    CHECK(wsum == Catch::Approx(1.0).margin(1e-14));
    // Partition of unity: G row sums.
    for (int a = 0; a < ref.mu; ++a) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += ref.g(a, j);
      CHECK(s == Catch::Approx(1.0).margin(1e-12));
    }
    // G and D reproduce monomials of degree <= p.
    for (int deg = 0; deg <= p; ++deg) {
      std::vector<double> coeff(n);
      for (int j = 0; j < n; ++j) coeff[j] = std::pow(ref.nodes[j], deg);
      for (int a = 0; a < ref.mu; ++a) {
        double val = 0.0, der = 0.0;
        for (int j = 0; j < n; ++j) {
          val += ref.g(a, j) * coeff[j];
          der += ref.d(a, j) * coeff[j];
        }
        const double x = ref.qpoints[a];
        CHECK(val == Catch::Approx(std::pow(x, deg)).margin(1e-11));
        CHECK(der == Catch::Approx(deg == 0 ? 0.0 : deg * std::pow(x, deg - 1)).margin(1e-10));
      }
    }
  }
}

TEST_CASE("reference quadrature integrates x^2 exactly") {
  const auto ref = build_reference(2);
  std::vector<double> coeff(3);
  for (int j = 0; j < 3; ++j) coeff[j] = ref.nodes[j] * ref.nodes[j];
  double integral = 0.0;
  for (int a = 0; a < ref.mu; ++a) {
    double val = 0.0;
    for (int j = 0; j < 3; ++j) val += ref.g(a, j) * coeff[j];
    integral += ref.qweights[a] * val;
  }
  CHECK(integral == Catch::Approx(1.0 / 3.0).margin(1e-14));
}

TEST_CASE("build_reference rejects under-resolved quadrature") {
  CHECK_THROWS_AS(build_reference(3, QuadratureKind::gauss, 3), ConfigError);
}

TEST_CASE("tensor evaluation via kron_apply reproduces polynomials") {
  for (int p : {2, 4}) {
    const auto ref = build_reference(p);
    const int n = p + 1;
    // f(x, y) = (2x - 1)^p + x y^p - 3 y, degree <= p per variable.
    auto f = [&](double x, double y) {
      return std::pow(2.0 * x - 1.0, p) + x * std::pow(y, p) - 3.0 * y;
    };
    std::vector<double> coeff(std::size_t(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) coeff[std::size_t(j) * n + i] = f(ref.nodes[i], ref.nodes[j]);
    KroneckerSum op;
    op.terms.push_back({ref.g, ref.g});
    const auto vals = kron_apply(op, coeff);
    for (int b = 0; b < ref.mu; ++b)
      for (int a = 0; a < ref.mu; ++a)
        CHECK(vals[std::size_t(b) * ref.mu + a] ==
              Catch::Approx(f(ref.qpoints[a], ref.qpoints[b])).margin(1e-11));
  }
}

TEST_CASE("cartesian mesh has constant Jacobian determinants") {
  const auto ref = build_reference(2);
  MeshSpec spec;
  spec.dim = 2;
  spec.counts = {2, 2, 1};
  const auto mesh = generate_mesh(spec, ref);
  REQUIRE(mesh.n_elements == 4);
  // Affine 0.5 x 0.5 cells mapped from the unit square: det(T') = h^2.
  for (int e = 0; e < 4; ++e)
    for (int q = 0; q < mesh.nvol; ++q) CHECK(mesh.jdet_at(e)[q] == Catch::Approx(0.25).margin(1e-15));
  CHECK(mesh.measure == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cartesian 6x6x6 hexahedral mesh on [0,2]^3") {
  const auto ref = build_reference(1);
  MeshSpec spec;
  spec.dim = 3;
  spec.counts = {6, 6, 6};
  spec.hi = {2.0, 2.0, 2.0};
  const auto mesh = generate_mesh(spec, ref);
  REQUIRE(mesh.n_elements == 216);
  const double want = std::pow(1.0 / 3.0, 3);
  for (int q = 0; q < mesh.nvol; ++q) CHECK(mesh.jdet_at(100)[q] == Catch::Approx(want).margin(1e-15));
  CHECK(mesh.measure == Catch::Approx(8.0).margin(1e-10));
}

TEST_CASE("perturbed mesh keeps positive Jacobians and conforming faces") {
  const auto ref = build_reference(3);
  MeshSpec spec;
  spec.dim = 2;
  spec.kind = MeshKind::perturbed;
  spec.counts = {4, 4, 1};
  spec.amplitude = 0.1;
  spec.seed = 7;
  const auto mesh = generate_mesh(spec, ref);
  for (int e = 0; e < mesh.n_elements; ++e)
    for (int q = 0; q < mesh.nvol; ++q) CHECK(mesh.jdet_at(e)[q] > 0.0);

  // Interior faces: both sides see the same physical quadrature points and
  // antipodal unit normals.
  for (int e = 0; e < mesh.n_elements; ++e)
    for (int f = 0; f < mesh.faces_per_elem(); ++f) {
      const auto& fc = mesh.faces[e][f];
      if (fc.neighbor < 0) continue;
      for (int q = 0; q < mesh.nface; ++q) {
        const auto [qa, qb] = orient_face_coords(mesh.dim, fc.orientation, mesh.mu, q % mesh.mu,
                                                 mesh.dim == 3 ? q / mesh.mu : 0);
        const int qn = (mesh.dim == 3 ? qb * mesh.mu : 0) + qa;
        for (int m = 0; m < mesh.dim; ++m) {
          CHECK(mesh.face_x_at(e, f)[q * mesh.dim + m] ==
                Catch::Approx(mesh.face_x_at(fc.neighbor, fc.neighbor_face)[qn * mesh.dim + m]).margin(1e-12));
          CHECK(mesh.face_n_at(e, f)[q * mesh.dim + m] ==
                Catch::Approx(-mesh.face_n_at(fc.neighbor, fc.neighbor_face)[qn * mesh.dim + m]).margin(1e-12));
        }
      }
    }
  // Straight-sided elements: the measure is still exact under quadrature.
  CHECK(mesh.measure == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("mesh generation rejects inverted elements") {
  const auto ref = build_reference(1);
  MeshSpec spec;
  spec.dim = 2;
  spec.kind = MeshKind::perturbed;
  spec.counts = {4, 4, 1};
  spec.amplitude = 4.0;
  spec.seed = 1;
  CHECK_THROWS_AS(generate_mesh(spec, ref), ConfigError);
}

TEST_CASE("periodic mesh wraps connectivity") {
  const auto ref = build_reference(1);
  MeshSpec spec;
  spec.dim = 2;
  spec.counts = {3, 3, 1};
  spec.periodic = true;
  const auto mesh = generate_mesh(spec, ref);
  for (int e = 0; e < mesh.n_elements; ++e)
    for (int f = 0; f < 4; ++f) CHECK(mesh.faces[e][f].neighbor >= 0);
  // Left face of element 0 wraps to element 2.
  CHECK(mesh.faces[0][0].neighbor == 2);
  CHECK(mesh.faces[0][0].neighbor_face == 1);
}

TEST_CASE("face_trace_indices 2d left face") {
  const auto idx = face_trace_indices(2, 3, 0);
  CHECK(idx == std::vector<int>{0, 4, 8, 12});
  const auto idx_rev = face_trace_indices(2, 3, 0, 1);
  CHECK(idx_rev == std::vector<int>{12, 8, 4, 0});
}

TEST_CASE("face_trace_indices 3d orientation swap permutes tangentials") {
  const int p = 2, n = p + 1;
  const auto ident = face_trace_indices(3, p, 0, 0);
  const auto swapped = face_trace_indices(3, p, 0, 4);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) CHECK(swapped[b * n + a] == ident[a * n + b]);
}

TEST_CASE("orientation codes without swap are involutions") {
  const int n = 5;
  for (int code : {0, 1, 2, 3}) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const auto [u, v] = orient_face_coords(3, code, n, a, b);
        const auto [a2, b2] = orient_face_coords(3, code, n, u, v);
        CHECK(a2 == a);
        CHECK(b2 == b);
      }
  }
}

TEST_CASE("mesh json round-trip preserves geometry") {
  const auto ref = build_reference(2);
  MeshSpec spec;
  spec.dim = 2;
  spec.kind = MeshKind::perturbed;
  spec.counts = {3, 2, 1};
  spec.amplitude = 0.08;
  spec.seed = 3;
  const auto mesh = generate_mesh(spec, ref);
  const auto doc = mesh_to_json(mesh);
  const std::string text = doc.dump();
  const auto mesh2 = mesh_from_json(nlohmann::json::parse(text), ref);
  REQUIRE(mesh2.n_elements == mesh.n_elements);
  for (std::size_t i = 0; i < mesh.jdet.size(); ++i) CHECK(mesh2.jdet[i] == mesh.jdet[i]);
  for (std::size_t i = 0; i < mesh.face_n.size(); ++i) CHECK(mesh2.face_n[i] == mesh.face_n[i]);
  for (std::size_t i = 0; i < mesh.face_x.size(); ++i) CHECK(mesh2.face_x[i] == mesh.face_x[i]);
}

TEST_CASE("scaled mesh kind stretches the unit domain") {
  const auto ref = build_reference(1);
  MeshSpec spec;
  spec.dim = 2;
  spec.kind = MeshKind::scaled;
  spec.counts = {4, 4, 1};
  spec.scale = {20.0, 15.0, 1.0};
  spec.amplitude = 0.1;
  spec.seed = 11;
  const auto mesh = generate_mesh(spec, ref);
  CHECK(mesh.measure == Catch::Approx(300.0).margin(1e-8));
}
