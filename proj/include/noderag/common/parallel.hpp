#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace noderag {

template <typename T>
struct Attempt {
  std::optional<T> value;
  std::string error;

  bool ok() const noexcept { return value.has_value(); }
};

/// Runs fn(i) for i in [0, n) with at most `parallelism` calls in flight.
/// Results come back indexed by i regardless of completion order; an
/// exception thrown by fn(i) is captured into result[i].error.
template <typename T>
std::vector<Attempt<T>> bounded_map(std::size_t n, std::size_t parallelism,
                                    const std::function<T(std::size_t)>& fn) {
  std::vector<Attempt<T>> results(n);
  auto run_one = [&](std::size_t i) {
    try {
      results[i].value.emplace(fn(i));
    } catch (const std::exception& e) {
      results[i].error = e.what();
    } catch (...) {
      results[i].error = "unknown error";
    }
  };

  const std::size_t workers = std::min(std::max<std::size_t>(parallelism, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) run_one(i);
    });
  }
  pool.clear();  // joins
  return results;
}

}  // namespace noderag
