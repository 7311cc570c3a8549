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

namespace npsa {

/// Worker count: NPSA_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("NPSA_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(task) for task in [0, tasks). Tasks are claimed dynamically, so
/// callers must make each task's output independent of which thread ran it.
template <typename Body>
void parallel_for(std::size_t tasks, Body&& body, unsigned threads = thread_count()) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  if (threads <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Combines partials[0..n) in a fixed pairwise tree; the result is independent
/// of thread scheduling.
template <typename T, typename Combine>
T pairwise_reduce(std::vector<T> partials, Combine&& combine) {
  while (partials.size() > 1) {
    std::vector<T> next;
    next.reserve((partials.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < partials.size(); i += 2)
      next.push_back(combine(std::move(partials[i]), partials[i + 1]));
    if (partials.size() % 2 == 1) next.push_back(std::move(partials.back()));
    partials = std::move(next);
  }
  return std::move(partials.front());
}

}  // namespace npsa
