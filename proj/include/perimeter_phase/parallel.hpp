#pragma once

// Fixed-size worker pool for independent tasks. The pool size is the
// hardware concurrency, capped by PERIMETER_PHASE_THREADS when set.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace perimeter_phase {

/// Throws config_error when PERIMETER_PHASE_THREADS is not a positive integer.
std::size_t worker_count();

/// Calls f(i) for i in [0, count) on the pool. Each index runs exactly once;
/// if any call throws, the exception of the lowest failing index is rethrown
/// after all workers finish.
template <typename F>
void parallel_for(std::size_t count, F&& f) {
  const std::size_t workers = std::min(worker_count(), count);
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace perimeter_phase
