#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstddef>
#include <thread>
#include <vector>

namespace convpow {

/// Worker count: min(hardware, CONVPOW_THREADS). Values below 1 clamp to 1.
inline int thread_count() {
  static const int n = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("CONVPOW_THREADS")) {
      const int req = std::atoi(env);
      if (req >= 1) hw = std::min(hw, req);
      else hw = 1;
    }
    return hw;
  }();
  return n;
}

/// Runs body(i) for i in [0, n). Work is split into a fixed number of chunks
/// so that chunk boundaries (and therefore any per-chunk reduction order) do
/// not depend on the worker count; outputs stay byte-identical whether the
/// loop runs on one thread or many.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const int workers = thread_count();
  if (n == 0) return;
  if (workers == 1 || n < 1024) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  constexpr std::size_t kChunks = 64;
  const std::size_t chunk = (n + kChunks - 1) / kChunks;
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      const std::size_t lo = c * chunk;
      if (lo >= n) return;
      const std::size_t hi = std::min(n, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) body(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

}  // namespace convpow
