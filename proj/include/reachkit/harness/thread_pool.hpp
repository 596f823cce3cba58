#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace reachkit::harness {

/// Runs f(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to index-addressed slots by the caller so aggregation stays
/// deterministic regardless of scheduling. The first exception wins and is
/// rethrown on the calling thread.
inline void parallel_for(int count, int threads, const std::function<void(int)>& f) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Worker count: explicit request, REACHKIT_THREADS override, else hardware.
inline int resolve_threads(int requested) {
  if (const char* env = std::getenv("REACHKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  if (requested >= 1) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace reachkit::harness
