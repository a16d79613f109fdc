#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mfg {

// Worker cap: MFG_TRPO_THREADS if set (clamped to >= 1), else hardware
// concurrency. Thread count must never influence computed values, only
// wall time; callers enforce that by keying randomness on item indices
// and reducing in index order.
inline int max_workers() {
  if (const char* env = std::getenv("MFG_TRPO_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(v);
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(begin, end) over a contiguous partition of [0, n). The body must
// write only to per-index slots; chunk boundaries depend on the worker count,
// so any per-item randomness has to be derived from the item index alone.
// The first exception thrown by any chunk is rethrown after all join.
inline void parallel_chunks(std::int64_t n,
                            const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (n <= 0) return;
  int workers = max_workers();
  if (workers > n) workers = static_cast<int>(n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t begin = w * chunk;
    std::int64_t end = begin + chunk < n ? begin + chunk : n;
    if (begin >= end) break;
    threads.emplace_back([&body, &errors, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mfg
