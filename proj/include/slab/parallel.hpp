#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace slab {

/// Worker cap used by parallel_map when no explicit count is given.
inline std::atomic<int>& default_jobs() {
  static std::atomic<int> jobs{1};
  return jobs;
}

/// out[i] = fn(i) for i < count, spread over at most `jobs` threads.
/// Results land at their own index, so the output never depends on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, Fn fn, int jobs = 0) {
  std::vector<T> out(count);
  if (jobs <= 0) jobs = default_jobs().load();
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace slab
