#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sgdinfer {

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Work items are
/// independent, so results written to slot i do not depend on scheduling.
/// The exception from the lowest failing index is rethrown.
inline void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  const auto workers = static_cast<std::int64_t>(threads < 1 ? 1 : threads);
  if (workers == 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  const auto spawn = std::min(workers, count);
  pool.reserve(static_cast<std::size_t>(spawn));
  for (std::int64_t w = 0; w < spawn; ++w) {
    pool.emplace_back([&] {
      for (std::int64_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Worker count from SGDINFER_THREADS, else hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("SGDINFER_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace sgdinfer
