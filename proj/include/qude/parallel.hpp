#pragma once

#include <cstddef>
#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace qude {

/// Runs fn(i) for i in [0, count) on up to `threads` workers with a static
/// round-robin assignment. Callers write results by index, so the reduction
/// order never depends on scheduling. The lowest-index exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t i = worker; i < count; i += stride) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = threads > 1 ? std::min<std::size_t>(static_cast<std::size_t>(threads), count) : 1;
  if (workers <= 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qude
