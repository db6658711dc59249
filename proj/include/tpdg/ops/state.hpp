#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tpdg/common/error.hpp"

namespace tpdg {

/// Element-major DG coefficient storage: [element][component][tensor index],
/// first tensor axis fastest.
struct StateVector {
  int n_elements = 0;
  int n_c = 0;
  int npe = 0; // (p+1)^d nodal coefficients per component
  std::vector<double> data;

  StateVector() = default;
  StateVector(int n_elements_, int n_c_, int npe_)
      : n_elements(n_elements_), n_c(n_c_), npe(npe_),
        data(std::size_t(n_elements_) * n_c_ * npe_, 0.0) {}

  std::size_t size() const { return data.size(); }
  int block_size() const { return n_c * npe; }

  double* element(int e) { return data.data() + std::size_t(e) * block_size(); }
  const double* element(int e) const { return data.data() + std::size_t(e) * block_size(); }
  double* component(int e, int c) { return element(e) + std::size_t(c) * npe; }
  const double* component(int e, int c) const { return element(e) + std::size_t(c) * npe; }

  bool same_shape(const StateVector& o) const {
    return n_elements == o.n_elements && n_c == o.n_c && npe == o.npe;
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double norm2() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
  }
};

/// FNV-1a over the coefficient bytes; used to detect stale linearization
/// caches.
inline std::uint64_t state_hash(const StateVector& u) {
  std::uint64_t h = 1469598103934665603ULL;
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(u.data.data());
  const std::size_t n = u.data.size() * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace tpdg
