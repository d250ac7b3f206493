#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pref::detail {

// Splits [0, count) into at most `threads` contiguous chunks and runs
// fn(begin, end, worker) on each. Chunk boundaries depend only on `count` and
// `threads`, so per-worker partial results can be reduced in a fixed order.
template <class Fn>
void parallel_chunks(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads > 0 ? threads : 1, count));
  if (workers <= 1) {
    fn(std::size_t{0}, count, 0);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&fn, begin, end, w] { fn(begin, end, static_cast<int>(w)); });
  }
  for (std::thread& t : pool) t.join();
}

inline int worker_count(std::size_t count, int threads) {
  return static_cast<int>(
      std::max<std::size_t>(1, std::min<std::size_t>(threads > 0 ? threads : 1, count)));
}

}  // namespace pref::detail
