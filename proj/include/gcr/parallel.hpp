#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace gcr {

// Effective worker count: an explicit request wins, then the GCR_WORKERS
// environment variable, then hardware concurrency.
int resolve_workers(int requested);

// Runs f(begin, end) over disjoint contiguous chunks covering [0, n).
// Each index is processed exactly once by exactly one thread, so any
// computation whose per-index work is independent and writes to disjoint
// outputs produces identical results for every worker count.
template <typename F>
void parallel_chunks(std::size_t n, int workers, F&& f) {
  if (n == 0) return;
  const std::size_t w =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)), n);
  if (w <= 1) {
    f(std::size_t{0}, n);
    return;
  }
  const std::size_t base = n / w;
  const std::size_t rem = n % w;
  std::vector<std::thread> threads;
  threads.reserve(w);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::size_t begin = 0;
  for (std::size_t c = 0; c < w; ++c) {
    const std::size_t end = begin + base + (c < rem ? 1 : 0);
    threads.emplace_back([&f, begin, end, &err_mutex, &first_error] {
      try {
        f(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gcr
