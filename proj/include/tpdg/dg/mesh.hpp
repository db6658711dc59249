#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tpdg/dg/reference_element.hpp"

namespace tpdg {

enum class MeshKind { cartesian, perturbed, scaled };

struct MeshSpec {
  int dim = 2;
  MeshKind kind = MeshKind::cartesian;
  std::array<int, 3> counts{1, 1, 1};
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};
  double amplitude = 0.0;       // interior vertex displacement, in units of h
  std::uint64_t seed = 0;
  std::array<double, 3> scale{1.0, 1.0, 1.0}; // for MeshKind::scaled
  bool periodic = false;

  void validate() const {
    if (dim != 2 && dim != 3) throw ConfigError("MeshSpec: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a) {
      if (counts[a] < 1) throw ConfigError("MeshSpec: counts must be >= 1");
      if (!(hi[a] > lo[a])) throw ConfigError("MeshSpec: hi must exceed lo");
    }
  }
};

/// Face connectivity record. neighbor < 0 marks a boundary face carrying a
/// tag; orientation permutes the neighbor's tangential face coordinates.
struct FaceConn {
  int neighbor = -1;
  int neighbor_face = -1;
  int orientation = 0;
  int boundary_tag = 1;
};

inline int face_axis(int face) { return face / 2; }
inline int face_side(int face) { return face % 2; }

inline std::array<int, 2> face_param_axes(int dim, int axis) {
  if (dim == 2) return {axis == 0 ? 1 : 0, -1};
  if (axis == 0) return {1, 2};
  if (axis == 1) return {0, 2};
  return {0, 1};
}

/// Apply an orientation code to tangential face indices with extent n per
/// direction. 2D uses codes {0: identity, 1: reversed}; 3D uses the eight
/// dihedral codes swap*4 + flip_t*2 + flip_s.
inline std::pair<int, int> orient_face_coords(int dim, int code, int n, int a, int b) {
  if (dim == 2) return {code == 0 ? a : n - 1 - a, 0};
  const bool swap = code & 4;
  const bool flip_t = code & 2;
  const bool flip_s = code & 1;
  int u = swap ? b : a;
  int v = swap ? a : b;
  if (flip_s) u = n - 1 - u;
  if (flip_t) v = n - 1 - v;
  return {u, v};
}

/// Mapped quadrilateral/hexahedral mesh with all quadrature-point geometry
/// cached: volume Jacobian determinants and adjugates, face surface weights,
/// outward unit normals, and face connectivity.
class MeshGeometry {
public:
  int dim = 2;
  int map_degree = 1;
  bool periodic = false;
  int n_elements = 0;

  std::vector<std::array<double, 3>> nodes;     // map-node pool
  std::vector<std::vector<int>> elem_nodes;     // per element, (q+1)^d ids, tensor order
  std::vector<std::array<FaceConn, 6>> faces;   // per element, 2*dim entries used

  // Quadrature-point caches (filled by precompute).
  int mu = 0;          // 1D quadrature points per direction
  int nvol = 0;        // mu^dim
  int nface = 0;       // mu^(dim-1)
  std::vector<double> jdet;     // [elem][q]
  std::vector<double> adj;      // [elem][q][k*dim + m], adj(T')
  std::vector<double> vol_x;    // [elem][q][m], physical coordinates
  std::vector<double> face_w;   // [elem][face][q], tangential weights * surface Jacobian
  std::vector<double> face_n;   // [elem][face][q][m], outward unit normal
  std::vector<double> face_x;   // [elem][face][q][m], physical coordinates

  double measure = 0.0;         // sum of w * |det|, the mesh volume

  int faces_per_elem() const { return 2 * dim; }

  const double* jdet_at(int e) const { return jdet.data() + std::size_t(e) * nvol; }
  const double* adj_at(int e) const { return adj.data() + std::size_t(e) * nvol * dim * dim; }
  const double* vol_x_at(int e) const { return vol_x.data() + std::size_t(e) * nvol * dim; }
  const double* face_w_at(int e, int f) const {
    return face_w.data() + (std::size_t(e) * faces_per_elem() + f) * nface;
  }
  const double* face_n_at(int e, int f) const {
    return face_n.data() + ((std::size_t(e) * faces_per_elem() + f) * nface) * dim;
  }
  const double* face_x_at(int e, int f) const {
    return face_x.data() + ((std::size_t(e) * faces_per_elem() + f) * nface) * dim;
  }

  /// Physical coordinates of the map at reference point xi.
  void map_point(int e, const double* xi, double* x) const {
    const int q1 = map_degree + 1;
    for (int m = 0; m < dim; ++m) x[m] = 0.0;
    std::array<std::array<double, 8>, 3> shape{};
    for (int a = 0; a < dim; ++a)
      for (int i = 0; i < q1; ++i) shape[a][i] = lagrange_value(map_nodes_1d_, i, xi[a]);
    const auto& conn = elem_nodes[e];
    const int npts = int(conn.size());
    for (int idx = 0; idx < npts; ++idx) {
      int rem = idx;
      double s = 1.0;
      for (int a = 0; a < dim; ++a) {
        s *= shape[a][rem % q1];
        rem /= q1;
      }
      for (int m = 0; m < dim; ++m) x[m] += s * nodes[conn[idx]][m];
    }
  }

  /// Jacobian T'(xi), laid out jac[m * dim + k] = d x_m / d xi_k.
  void map_jacobian(int e, const double* xi, double* jac) const {
    const int q1 = map_degree + 1;
    std::array<std::array<double, 8>, 3> shape{}, dshape{};
    for (int a = 0; a < dim; ++a)
      for (int i = 0; i < q1; ++i) {
        shape[a][i] = lagrange_value(map_nodes_1d_, i, xi[a]);
        dshape[a][i] = lagrange_derivative(map_nodes_1d_, i, xi[a]);
      }
    for (int i = 0; i < dim * dim; ++i) jac[i] = 0.0;
    const auto& conn = elem_nodes[e];
    const int npts = int(conn.size());
    for (int idx = 0; idx < npts; ++idx) {
      for (int k = 0; k < dim; ++k) {
        int rem = idx;
        double s = 1.0;
        for (int a = 0; a < dim; ++a) {
          s *= (a == k) ? dshape[a][rem % q1] : shape[a][rem % q1];
          rem /= q1;
        }
        for (int m = 0; m < dim; ++m) jac[m * dim + k] += s * nodes[conn[idx]][m];
      }
    }
  }

  /// Fill the quadrature caches for the given reference element. Throws on
  /// inverted elements.
  void precompute(const ReferenceElement& ref) {
    mu = ref.mu;
    nvol = 1;
    for (int a = 0; a < dim; ++a) nvol *= mu;
    nface = nvol / mu;
    map_nodes_1d_ = gauss_lobatto_rule(map_degree + 1).points;

    jdet.assign(std::size_t(n_elements) * nvol, 0.0);
    adj.assign(std::size_t(n_elements) * nvol * dim * dim, 0.0);
    vol_x.assign(std::size_t(n_elements) * nvol * dim, 0.0);
    face_w.assign(std::size_t(n_elements) * faces_per_elem() * nface, 0.0);
    face_n.assign(std::size_t(n_elements) * faces_per_elem() * nface * dim, 0.0);
    face_x.assign(std::size_t(n_elements) * faces_per_elem() * nface * dim, 0.0);
    measure = 0.0;

    std::array<double, 9> jac{}, adj_pt{};
    std::array<double, 3> xi{}, x{};
    for (int e = 0; e < n_elements; ++e) {
      for (int q = 0; q < nvol; ++q) {
        int rem = q;
        for (int a = 0; a < dim; ++a) {
          xi[a] = ref.qpoints[rem % mu];
          rem /= mu;
        }
        map_jacobian(e, xi.data(), jac.data());
        const double det = adjugate(jac.data(), adj_pt.data());
        if (det <= 0.0)
          throw ConfigError("MeshGeometry: non-positive Jacobian in element " + std::to_string(e));
        jdet[std::size_t(e) * nvol + q] = det;
        double wq = 1.0;
        rem = q;
        for (int a = 0; a < dim; ++a) {
          wq *= ref.qweights[rem % mu];
          rem /= mu;
        }
        measure += wq * det;
        for (int i = 0; i < dim * dim; ++i) adj[(std::size_t(e) * nvol + q) * dim * dim + i] = adj_pt[i];
        map_point(e, xi.data(), x.data());
        for (int m = 0; m < dim; ++m) vol_x[(std::size_t(e) * nvol + q) * dim + m] = x[m];
      }
      for (int f = 0; f < faces_per_elem(); ++f) {
        const int axis = face_axis(f);
        const int side = face_side(f);
        const auto tang = face_param_axes(dim, axis);
        for (int q = 0; q < nface; ++q) {
          const int alpha = q % mu;
          const int beta = (dim == 3) ? q / mu : 0;
          xi[axis] = double(side);
          xi[tang[0]] = ref.qpoints[alpha];
          if (dim == 3) xi[tang[1]] = ref.qpoints[beta];
          map_jacobian(e, xi.data(), jac.data());
          adjugate(jac.data(), adj_pt.data());
          // Nanson: n dA = adj(T')^T N dXi with N = +-e_axis.
          const double sign = side == 1 ? 1.0 : -1.0;
          double len = 0.0;
          std::array<double, 3> nvec{};
          for (int m = 0; m < dim; ++m) {
            nvec[m] = sign * adj_pt[axis * dim + m];
            len += nvec[m] * nvec[m];
          }
          len = std::sqrt(len);
          double wt = ref.qweights[alpha];
          if (dim == 3) wt *= ref.qweights[beta];
          const std::size_t base = (std::size_t(e) * faces_per_elem() + f) * nface + q;
          face_w[base] = wt * len;
          map_point(e, xi.data(), x.data());
          for (int m = 0; m < dim; ++m) {
            face_n[base * dim + m] = nvec[m] / len;
            face_x[base * dim + m] = x[m];
          }
        }
      }
    }
  }

private:
  /// adj(T') with adj * T' = det * I; returns det. jac[m*dim+k] = dx_m/dxi_k,
  /// out[k*dim+m] = adj(T')_{k m}.
  double adjugate(const double* jac, double* out) const {
    if (dim == 2) {
      const double a = jac[0], b = jac[1], c = jac[2], d = jac[3];
      out[0] = d;
      out[1] = -b;
      out[2] = -c;
      out[3] = a;
      return a * d - b * c;
    }
    auto J = [&](int m, int k) { return jac[m * 3 + k]; };
    // Cofactor expansion: adj = det * inv, adj(k, m) = cofactor(m, k).
    out[0 * 3 + 0] = J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1);
    out[0 * 3 + 1] = -(J(0, 1) * J(2, 2) - J(0, 2) * J(2, 1));
    out[0 * 3 + 2] = J(0, 1) * J(1, 2) - J(0, 2) * J(1, 1);
    out[1 * 3 + 0] = -(J(1, 0) * J(2, 2) - J(1, 2) * J(2, 0));
    out[1 * 3 + 1] = J(0, 0) * J(2, 2) - J(0, 2) * J(2, 0);
    out[1 * 3 + 2] = -(J(0, 0) * J(1, 2) - J(0, 2) * J(1, 0));
    out[2 * 3 + 0] = J(1, 0) * J(2, 1) - J(1, 1) * J(2, 0);
    out[2 * 3 + 1] = -(J(0, 0) * J(2, 1) - J(0, 1) * J(2, 0));
    out[2 * 3 + 2] = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
    return J(0, 0) * out[0] + J(0, 1) * out[3] + J(0, 2) * out[6];
  }

  std::vector<double> map_nodes_1d_{0.0, 1.0};
};

/// Structured quadrilateral/hexahedral generator: cartesian, perturbed
/// (seeded interior-vertex displacement, bilinear/trilinear maps), or
/// perturbed-and-scaled. Geometry caches are built against ref.
inline MeshGeometry generate_mesh(const MeshSpec& spec_in, const ReferenceElement& ref) {
  MeshSpec spec = spec_in;
  spec.validate();
  if (spec.kind == MeshKind::scaled) {
    for (int a = 0; a < spec.dim; ++a) {
      spec.lo[a] = 0.0;
      spec.hi[a] = spec.scale[a];
    }
  }

  MeshGeometry mesh;
  mesh.dim = spec.dim;
  mesh.map_degree = 1;
  mesh.periodic = spec.periodic;

  const int d = spec.dim;
  std::array<int, 3> nv{1, 1, 1};
  std::array<double, 3> h{1.0, 1.0, 1.0};
  for (int a = 0; a < d; ++a) {
    nv[a] = spec.counts[a] + 1;
    h[a] = (spec.hi[a] - spec.lo[a]) / spec.counts[a];
  }
  auto vid = [&](int i, int j, int k) { return (k * nv[1] + j) * nv[0] + i; };

  mesh.nodes.resize(std::size_t(nv[0]) * nv[1] * (d == 3 ? nv[2] : 1));
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < (d == 3 ? nv[2] : 1); ++k)
    for (int j = 0; j < nv[1]; ++j)
      for (int i = 0; i < nv[0]; ++i) {
        std::array<double, 3> x{spec.lo[0] + i * h[0], spec.lo[1] + j * h[1],
                                d == 3 ? spec.lo[2] + k * h[2] : 0.0};
        if (spec.kind != MeshKind::cartesian && spec.amplitude != 0.0) {
          const bool interior = i > 0 && i < nv[0] - 1 && j > 0 && j < nv[1] - 1 &&
                                (d == 2 || (k > 0 && k < nv[2] - 1));
          std::array<double, 3> disp{};
          for (int a = 0; a < d; ++a) disp[a] = spec.amplitude * h[a] * unit(rng);
          if (interior)
            for (int a = 0; a < d; ++a) x[a] += disp[a];
        }
        mesh.nodes[vid(i, j, k)] = x;
      }

  const int ne0 = spec.counts[0], ne1 = spec.counts[1], ne2 = d == 3 ? spec.counts[2] : 1;
  mesh.n_elements = ne0 * ne1 * ne2;
  mesh.elem_nodes.resize(mesh.n_elements);
  mesh.faces.resize(mesh.n_elements);
  auto eid = [&](int i, int j, int k) { return (k * ne1 + j) * ne0 + i; };

  for (int k = 0; k < ne2; ++k)
    for (int j = 0; j < ne1; ++j)
      for (int i = 0; i < ne0; ++i) {
        const int e = eid(i, j, k);
        auto& conn = mesh.elem_nodes[e];
        conn.clear();
        for (int ck = 0; ck <= (d == 3 ? 1 : 0); ++ck)
          for (int cj = 0; cj <= 1; ++cj)
            for (int ci = 0; ci <= 1; ++ci) conn.push_back(vid(i + ci, j + cj, k + ck));

        std::array<int, 3> pos{i, j, k};
        std::array<int, 3> cnt{ne0, ne1, ne2};
        for (int f = 0; f < 2 * d; ++f) {
          const int axis = face_axis(f);
          const int side = face_side(f);
          FaceConn fc;
          int npos = pos[axis] + (side == 1 ? 1 : -1);
          if (npos >= 0 && npos < cnt[axis]) {
            std::array<int, 3> np = pos;
            np[axis] = npos;
            fc.neighbor = eid(np[0], np[1], np[2]);
            fc.neighbor_face = 2 * axis + (1 - side);
            fc.orientation = 0;
            fc.boundary_tag = 0;
          } else if (spec.periodic) {
            std::array<int, 3> np = pos;
            np[axis] = (npos + cnt[axis]) % cnt[axis];
            fc.neighbor = eid(np[0], np[1], np[2]);
            fc.neighbor_face = 2 * axis + (1 - side);
            fc.orientation = 0;
            fc.boundary_tag = 0;
          } else {
            fc.neighbor = -1;
            fc.boundary_tag = 1;
          }
          mesh.faces[e][f] = fc;
        }
      }

  mesh.precompute(ref);
  return mesh;
}

} // namespace tpdg
