#pragma once

// Node-parallel evaluation with deterministic results: workers fill
// preallocated slots by index, reductions run as a fixed pairwise tree, so
// output is bit-identical for any thread count.  FINSLER_LAB_THREADS caps
// the pool.

#include <cstdlib>
#include <thread>
#include <vector>

#include "finsler/types.hpp"

namespace finsler {

inline int thread_cap() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FINSLER_LAB_THREADS")) {
    const long requested = std::strtol(env, nullptr, 10);
    if (requested >= 1) return static_cast<int>(std::min<long>(requested, hw));
  }
  return static_cast<int>(hw);
}

/// fn(i) for i in [0, count), chunked across threads.  Exceptions from
/// workers are rethrown on the calling thread.
template <class Fn>
void parallel_for(size_t count, Fn&& fn) {
  const int threads = std::min<size_t>(thread_cap(), count == 0 ? 1 : count);
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const size_t chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const size_t begin = t * chunk;
      const size_t end = std::min(count, begin + chunk);
      try {
        for (size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace finsler
