#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace wishartlab {

// Splits [0, n) into contiguous chunks handled by up to `threads` workers.
// Work must be index-keyed (RNG substreams), so the split never changes
// results. threads <= 1 (or tiny n) runs inline.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::size_t workers = threads <= 0 ? hw : static_cast<std::size_t>(threads);
  workers = std::min<std::size_t>(workers, n);
  if (workers <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace wishartlab
