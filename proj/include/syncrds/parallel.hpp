#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace syncrds {

struct Parallelism {
  unsigned threads = 0;  // 0: SYNCRDS_THREADS, then hardware concurrency
};

unsigned resolve_threads(const Parallelism& par);

/// Runs body(i) for i in [0, n). Work items must write only to their own
/// slot; if several throw, the exception of the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t n, const Parallelism& par, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(resolve_threads(par), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = n;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace syncrds
