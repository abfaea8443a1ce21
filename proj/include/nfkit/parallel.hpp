// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace nfkit {

// Evaluates f(0) .. f(count - 1) on up to `workers` threads (0 = hardware
// concurrency) and returns the results in index order. The first exception
// by index is rethrown after all workers finish.
template <class F>
auto parallel_map(int count, int workers, F&& f) -> std::vector<std::invoke_result_t<F&, int>> {
  using R = std::invoke_result_t<F&, int>;
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(std::max(count, 0)));
  std::vector<std::exception_ptr> errors(slots.size());
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(count, 1));

  auto work = [&](std::atomic<int>& next) {
    for (int i = next++; i < count; i = next++) {
      try {
        slots[static_cast<std::size_t>(i)].emplace(f(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::atomic<int> next{0};
  if (workers <= 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, std::ref(next));
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace nfkit
