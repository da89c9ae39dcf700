#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace triadkit {

inline unsigned default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Runs body(worker, begin, end) over fixed-size chunks of [0, n) pulled
/// dynamically by `threads` workers. Each worker owns accumulator slot
/// `worker`; callers merge slots afterwards, so results only need the
/// merge to be associative and commutative.
template <class Body>
void parallel_chunks(std::size_t n, unsigned threads, std::size_t chunk, Body&& body) {
  threads = std::max(1u, threads);
  chunk = std::max<std::size_t>(1, chunk);
  if (threads == 1 || n <= chunk) {
    for (std::size_t b = 0; b < n; b += chunk) body(0u, b, std::min(n, b + chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&](unsigned w) {
    try {
      for (;;) {
        const std::size_t b = next.fetch_add(chunk);
        if (b >= n) break;
        body(w, b, std::min(n, b + chunk));
      }
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace triadkit
