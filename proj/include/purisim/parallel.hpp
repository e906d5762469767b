#pragma once

// Deterministic index-parallel evaluation.  Each index is an independent
// computation whose result is stored by index, so the output is identical
// to sequential evaluation for any worker count.  PURISIM_THREADS (>= 1)
// caps the number of workers.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace purisim {

inline unsigned worker_count(std::size_t njobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned n = hw;
  if (const char* env = std::getenv("PURISIM_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
  }
  if (njobs < n) n = static_cast<unsigned>(njobs);
  return n == 0 ? 1 : n;
}

template <typename F>
inline void parallel_for_index(std::size_t n, F&& f) {
  if (n == 0) return;
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (failed) std::rethrow_exception(error);
}

}  // namespace purisim
