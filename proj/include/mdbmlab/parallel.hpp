#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mdbmlab {

/// Process-wide worker count used when a call does not pass one explicitly.
unsigned default_threads();
void set_default_threads(unsigned n);

/// Runs body(i) for i in [0, n) on contiguous blocks. Each index must write
/// only its own output slot; results are then independent of the thread
/// count. The exception from the lowest failing block is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0) {
  if (threads == 0) threads = default_threads();
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mdbmlab
