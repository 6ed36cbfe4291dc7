#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bayesdr {

/// Number of workers to use when the caller asks for 0 ("auto").
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out in contiguous blocks; body must write only to slots owned by
/// its index, which keeps results independent of the worker count. The
/// first exception thrown by any worker is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::min(resolve_threads(threads), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = count * w / threads;
    const std::size_t end = count * (w + 1) / threads;
    workers.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace bayesdr
