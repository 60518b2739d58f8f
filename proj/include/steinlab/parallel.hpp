#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace steinlab {

// Monte Carlo work is cut into fixed-size blocks, each with its own
// sub-stream, so results never depend on how many workers run them.
inline constexpr std::size_t kBlockSize = std::size_t{1} << 15;

// Worker cap: hardware concurrency, further capped by STEINLAB_THREADS.
unsigned default_worker_count();

inline std::size_t block_count(std::size_t total) { return (total + kBlockSize - 1) / kBlockSize; }

// Calls fn(block, begin, end) for every block of [0, total). Blocks are
// handed out dynamically; exceptions from workers are rethrown here.
template <class Fn>
void for_each_block(std::size_t total, unsigned workers, Fn&& fn) {
  const std::size_t blocks = block_count(total);
  if (workers == 0) workers = default_worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * kBlockSize;
    fn(b, begin, std::min(total, begin + kBlockSize));
  };
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) {
        try {
          run_block(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = blocks;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace steinlab
