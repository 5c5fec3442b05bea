// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace readapt {

// Resolves a thread-count request: 0 means "auto" (hardware concurrency,
// overridable through READAPT_THREADS). Always returns at least 1.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("READAPT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, count) on up to `threads` worker threads.
// Work items must be independent; the first exception thrown by any worker
// is rethrown on the calling thread after all workers join.
inline void parallel_for(size_t count, unsigned threads,
                         const std::function<void(size_t)>& fn) {
  threads = std::min<size_t>(resolve_threads(threads), count);
  if (count == 0) return;
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::mutex mu;
  std::exception_ptr first_error;
  std::atomic<size_t> next{0};

  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace readapt
