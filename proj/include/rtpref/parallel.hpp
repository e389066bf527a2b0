#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rtpref {

/// Runs fn(i) for i in [0, n_tasks) on a small thread pool. Tasks must not
/// share mutable state. If several tasks throw, the exception of the lowest
/// index is rethrown, so failures are reported deterministically.
template <class Fn>
void parallel_for(std::size_t n_tasks, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n_tasks, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(n_tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_tasks; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace rtpref
