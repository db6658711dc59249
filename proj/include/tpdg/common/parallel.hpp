#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace tpdg {

/// Process-wide worker count used by element-parallel loops. 1 = sequential.
inline int& thread_count() {
  static int n = 1;
  return n;
}

/// Map fn(i) over i in [0, n). Writes of distinct i must not alias; shared
/// state is read-only. With thread_count() == 1 this is a plain loop.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace tpdg
