#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace prase {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block) for block = 0..n_blocks-1 on up to `workers` threads.
// Blocks are claimed dynamically; callers must keep per-block work
// independent (disjoint output slots, or per-block buffers merged in
// block order afterwards) so results do not depend on the worker count.
template <typename Fn>
void run_blocks(std::size_t n_blocks, int workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (n_blocks == 0) return;
  if (workers <= 1 || n_blocks == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    while (true) {
      std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) break;
      fn(b);
    }
  };
  std::vector<std::thread> pool;
  std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n_blocks);
  pool.reserve(n_threads);
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(body);
  for (auto& t : pool) t.join();
}

}  // namespace prase
