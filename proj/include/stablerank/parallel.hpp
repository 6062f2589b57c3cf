#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace stablerank {

/// Worker count: STABLE_RANK_THREADS when set, else the hardware concurrency.
inline std::size_t thread_budget() {
  if (const char* env = std::getenv("STABLE_RANK_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(chunk) for chunk in [0, chunks). Results must depend only on the
/// chunk index so that output is identical under any scheduling.
template <typename Fn>
void parallel_chunks(std::size_t chunks, Fn&& fn) {
  const std::size_t workers = std::min(thread_budget(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) fn(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = chunks;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace stablerank
