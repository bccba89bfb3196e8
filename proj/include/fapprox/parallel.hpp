#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fapprox {

/// Process-wide worker count used by parallel_for. 1 runs inline.
inline std::atomic<unsigned>& thread_count() {
  static std::atomic<unsigned> n{1};
  return n;
}

inline bool& inside_parallel_region() {
  thread_local bool inside = false;
  return inside;
}

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs;
/// results are therefore independent of the worker count. Nested calls run
/// inline on the calling worker.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = std::min<std::size_t>(thread_count().load(), n);
  if (workers <= 1 || inside_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      inside_parallel_region() = true;
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fapprox
