#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ivmkit {

inline unsigned effective_threads(unsigned hint, std::size_t n) {
  unsigned t = hint > 0 ? hint : std::thread::hardware_concurrency();
  if (t == 0) t = 1;
  if (static_cast<std::size_t>(t) > n) t = static_cast<unsigned>(n);
  return t == 0 ? 1 : t;
}

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
// thread; callers must make fn(i) write only to slot i of preallocated
// storage so results do not depend on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned threads_hint = 0) {
  if (n == 0) return;
  const unsigned threads = effective_threads(threads_hint, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ivmkit
