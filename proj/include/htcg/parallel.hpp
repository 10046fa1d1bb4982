#pragma once

// Minimal fork-join helper. Results are stored by task index, so reductions
// over them are ordered and independent of scheduling.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace htcg {

/// HTCG_WORKERS if set and positive, else the number of logical cores.
inline unsigned default_workers() {
  if (const char* env = std::getenv("HTCG_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

/// out[i] = f(i) for i < n on up to `workers` threads. The exception of the
/// lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, F&& f, unsigned workers = 0) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  if (workers == 0) workers = default_workers();
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned t = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (t <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace htcg
