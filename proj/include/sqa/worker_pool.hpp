#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sqa {

/// Worker count from the SQA_WORKERS environment variable (default 1).
int worker_count_from_env();

/// Runs fn(i) for i in [0, count) on up to `workers` threads and returns the
/// results in index order. If any task throws, the exception of the lowest
/// failing index is rethrown after all threads finish.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, int workers, F&& fn) {
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = workers < 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace sqa
