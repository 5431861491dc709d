#pragma once

// Minimal deterministic slot-parallel loop. Each index writes only its own
// output slot, so results are independent of the thread count.

#include <functional>
#include <thread>
#include <vector>

namespace cmps::detail {

inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nt = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += nt) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace cmps::detail
