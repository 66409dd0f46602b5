#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lsaboot {

/// Runs body(i) for i in [0, count) on up to `workers` threads pulling indices
/// from a shared counter. Results must be written to index-keyed storage so
/// the outcome does not depend on scheduling. The exception thrown for the
/// smallest failing index is rethrown. If `stop` becomes true, no further
/// indices are started.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body,
                  const std::atomic<bool>* stop = nullptr) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = count;

  auto worker = [&] {
    for (;;) {
      if (stop != nullptr && stop->load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      {
        std::lock_guard lock(error_mutex);
        if (error && i > error_index) return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace lsaboot
