#include <atomic>
#include <thread>
#include <vector>

#include "urlab/types.hpp"

namespace urlab {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, threads);
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace urlab
