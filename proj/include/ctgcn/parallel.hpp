#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace ctgcn {

// Runs fn(0..n-1) across `workers` threads pulling from a shared counter.
// Each index is processed exactly once and writes only to its own slot, so
// results cannot depend on the worker count. fn must not throw; callers that
// can fail capture errors inside their result slots.
inline void parallel_for_index(int n, int workers,
                               const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::min(std::max(workers, 1), n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ctgcn
