#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace drtalk {

// Runs fn(0..count-1) across up to `threads` workers, striped by index.
// Callers own determinism: each job must write only to its own slot so the
// result is independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (count == 0) return;
  std::size_t workers = threads <= 1 ? 1 : static_cast<std::size_t>(threads);
  workers = std::min(workers, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&fn, t, workers, count] {
      for (std::size_t i = t; i < count; i += workers) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

inline int default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace drtalk
