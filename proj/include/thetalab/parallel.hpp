#pragma once

// Deterministic indexed work distribution: results land in index order, so
// the worker count never changes output bytes. Each task must only write to
// its own slot.

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace thetalab {

template <typename Fn>
inline void run_indexed(int workers, size_t count, Fn&& fn) {
  if (count == 0) return;
  if (workers <= 1 || count == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  int nthreads = std::min<size_t>(workers, count);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace thetalab
