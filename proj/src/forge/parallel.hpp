#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace cocycle::forge {

/// Static-partition parallel loop over [0, total). Workers write into
/// index-addressed slots only, so results are identical for any thread count.
inline void parallel_for(int total, int threads,
                         const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, std::max(1, total));
  if (threads == 1) {
    for (int i = 0; i < total; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([=]() {
      for (int i = w; i < total; i += threads) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cocycle::forge
