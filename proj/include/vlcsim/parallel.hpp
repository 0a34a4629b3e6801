#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace vlcsim {

// Static chunk grid executed by a worker pool. The chunk layout depends only
// on (total, chunk_size), never on the worker count, and every chunk writes to
// its own output slot, so reductions done afterwards in chunk order are
// worker-count independent.
template <typename Fn>
inline void parallel_chunks(std::size_t total, std::size_t chunk_size, int workers,
                            Fn&& fn) {
  if (total == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
  if (workers <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::size_t>(workers, n_chunks));
  pool.reserve(static_cast<size_t>(spawn));
  for (int w = 0; w < spawn; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

}  // namespace vlcsim
