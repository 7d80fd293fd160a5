#ifndef EIGENSR_PARALLEL_HPP_
#define EIGENSR_PARALLEL_HPP_

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace eigensr {

/// Runs fn(i) for i in [0, n). Each index is processed exactly once and must
/// write only its own outputs, so parallel and serial runs are bit-identical.
inline void parallel_for(int n, int threads, const std::function<void(int)> &fn) {
  if (n <= 0) return;
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto &th : pool) th.join();
}

/// EIGENSR_THREADS env var, else hardware concurrency.
inline int default_thread_count() {
  if (const char *env = std::getenv("EIGENSR_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace eigensr

#endif
