#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pair {

/// Worker count from PAIR_THREADS (default 1).
inline int thread_count() {
  if (const char *env = std::getenv("PAIR_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0)
      return n;
  }
  return 1;
}

/// Runs fn(i) for i in [0, n). Each index writes only its own output slot, so
/// results do not depend on scheduling; callers reduce afterwards in index
/// order. The first exception thrown by a worker is rethrown on the caller.
template <class Fn> void parallel_for(int n, Fn &&fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int i = w; i < n; i += workers)
            fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
        }
      });
  }
  if (error)
    std::rethrow_exception(error);
}

} // namespace pair
