#pragma once

#include <vector>

#include "tpdg/dg/mesh.hpp"

namespace tpdg {

/// Tensor indices (flattened, first axis fastest) of the nodal basis
/// functions supported on a face, enumerated in face-tangential order with
/// the orientation code applied. With Gauss-Lobatto nodes these are exactly
/// the (p+1)^{d-1} functions whose trace on the face is nonzero; face
/// kernels skip all others.
inline std::vector<int> face_trace_indices(int dim, int p, int face, int orientation = 0) {
  if (face < 0 || face >= 2 * dim) throw ConfigError("face_trace_indices: invalid face id");
  if (dim == 2 && (orientation < 0 || orientation > 1))
    throw ConfigError("face_trace_indices: invalid 2D orientation code");
  if (dim == 3 && (orientation < 0 || orientation > 7))
    throw ConfigError("face_trace_indices: invalid 3D orientation code");
  const int n = p + 1;
  const int axis = face_axis(face);
  const int side = face_side(face);
  const auto tang = face_param_axes(dim, axis);
  const int count = dim == 2 ? n : n * n;
  std::vector<int> out(count);
  std::array<int, 3> idx{0, 0, 0};
  idx[axis] = side == 0 ? 0 : p;
  for (int q = 0; q < count; ++q) {
    const int a = q % n;
    const int b = dim == 3 ? q / n : 0;
    const auto [oa, ob] = orient_face_coords(dim, orientation, n, a, b);
    idx[tang[0]] = oa;
    if (dim == 3) idx[tang[1]] = ob;
    int flat = 0;
    for (int ax = dim - 1; ax >= 0; --ax) flat = flat * n + idx[ax];
    out[q] = flat;
  }
  return out;
}

} // namespace tpdg
