#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dsb {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(r) for r in [0, n) across contiguous chunks. Each replicate owns
// its RNG stream and output slot, so results do not depend on the thread
// count; reductions happen afterwards in replicate order.
inline void parallel_replicates(int n, int threads, const std::function<void(int)>& body) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n <= 1) {
    for (int r = 0; r < n; ++r) body(r);
    return;
  }
  if (threads > n) threads = n;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  std::mutex error_mutex;
  std::exception_ptr first_error;
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(n) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
    workers.emplace_back([&, begin, end]() {
      try {
        for (int r = begin; r < end; ++r) body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dsb
