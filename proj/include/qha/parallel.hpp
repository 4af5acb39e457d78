#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace qha {

// Thread cap: QHA_THREADS if set, else 1. Serial by default because the
// per-step kernels here are small; results are identical either way
// (disjoint index chunks, counter-based RNG).
inline int thread_count() {
  if (const char* env = std::getenv("QHA_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// parallel_for over [0, n): body(i) must only write state owned by index i.
template <typename Body>
void parallel_for(std::ptrdiff_t n, const Body& body) {
  const int threads = std::min<std::ptrdiff_t>(thread_count(), n > 0 ? n : 1);
  if (threads <= 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::ptrdiff_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::ptrdiff_t begin = t * chunk;
    const std::ptrdiff_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::ptrdiff_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qha
