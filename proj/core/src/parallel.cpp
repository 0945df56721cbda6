#include "terralio/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace terralio {

namespace {
std::size_t g_workers = 1;
constexpr std::size_t kChunkSize = 256;
}  // namespace

void set_worker_count(std::size_t n) { g_workers = std::max<std::size_t>(1, n); }
std::size_t worker_count() { return g_workers; }

namespace detail {

std::size_t chunk_count(std::size_t n) {
  return n == 0 ? 0 : (n + kChunkSize - 1) / kChunkSize;
}

void chunk_bounds(std::size_t n, std::size_t i, std::size_t& b, std::size_t& e) {
  b = i * kChunkSize;
  e = std::min(n, b + kChunkSize);
}

void run_chunks(std::size_t num_chunks,
                const std::function<void(std::size_t)>& fn) {
  if (num_chunks == 0) return;
  const std::size_t workers = std::min(g_workers, num_chunks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < num_chunks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= num_chunks) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
}

}  // namespace detail
}  // namespace terralio
