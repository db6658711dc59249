#pragma once

#include <span>
#include <vector>

#include "tpdg/ops/linearized.hpp"

namespace tpdg {

/// Exact block-Jacobi preconditioner: one LU per element (full mode) or one
/// LU per element and component (small mode, inter-component coupling
/// dropped).
class BlockJacobiPC {
public:
  BlockMode mode = BlockMode::full;
  int n_elements = 0;
  int n_c = 0;
  int npe = 0;
  std::vector<LuFactor> lus; // full: [e]; small: [e * n_c + c]

  void apply(std::span<const double> in, std::span<double> out) const {
    const int block = n_c * npe;
    if (mode == BlockMode::full) {
      for (int e = 0; e < n_elements; ++e)
        lus[e].solve(in.subspan(std::size_t(e) * block, block), out.subspan(std::size_t(e) * block, block));
    } else {
      for (int e = 0; e < n_elements; ++e)
        for (int c = 0; c < n_c; ++c) {
          const std::size_t off = std::size_t(e) * block + std::size_t(c) * npe;
          lus[std::size_t(e) * n_c + c].solve(in.subspan(off, npe), out.subspan(off, npe));
        }
    }
  }
};

/// Assemble and factor every diagonal block. Cost O(p^{3d}) per element in
/// full mode; refuses runs whose total entry count exceeds the budget.
inline BlockJacobiPC form_block_jacobi(const LinearizedOperator& lin, BlockMode mode = BlockMode::full,
                                       long max_total_entries = 300'000'000) {
  lin.check_cache();
  const Discretization& sys = *lin.sys;
  BlockJacobiPC pc;
  pc.mode = mode;
  pc.n_elements = sys.mesh.n_elements;
  pc.n_c = sys.n_c;
  pc.npe = sys.npe;
  const long block = mode == BlockMode::full ? long(sys.n_c) * sys.npe : sys.npe;
  const long blocks_per_elem = mode == BlockMode::full ? 1 : sys.n_c;
  if (block * block * blocks_per_elem * pc.n_elements > max_total_entries)
    throw ConfigError("form_block_jacobi: " +
                      std::to_string(block * block * blocks_per_elem * pc.n_elements) +
                      " entries exceed the budget");

  pc.lus.resize(std::size_t(pc.n_elements) * blocks_per_elem);
  std::vector<std::string> errors(pc.n_elements);
  parallel_for(pc.n_elements, [&](int e) {
    try {
      if (mode == BlockMode::full) {
        pc.lus[e] = LuFactor(assemble_diag_block(lin, e));
      } else {
        const auto blocks = assemble_diag_block_small(lin, e);
        for (int c = 0; c < sys.n_c; ++c) pc.lus[std::size_t(e) * sys.n_c + c] = LuFactor(blocks[c]);
      }
    } catch (const SingularError& err) {
      errors[e] = err.what();
    }
  });
  for (int e = 0; e < pc.n_elements; ++e)
    if (!errors[e].empty())
      throw SingularError("form_block_jacobi: element " + std::to_string(e) + ": " + errors[e]);
  return pc;
}

} // namespace tpdg
