#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace vortexlab {

/// Worker count: hardware concurrency capped by the VORTEXLAB_THREADS
/// environment variable (if set and positive).
inline unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("VORTEXLAB_THREADS")) {
    const long cap = std::atol(env);
    if (cap > 0 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
  }
  return n;
}

/// Runs fn(i) for i in [0, n). Each item writes only its own output slot,
/// so the result is bit-identical for any thread count.
template <class Fn>
void parallel_for_items(std::size_t n, Fn&& fn) {
  const unsigned workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace vortexlab
