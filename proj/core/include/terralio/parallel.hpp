#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace terralio {

/// Global worker-pool size used by data-parallel kernels (>= 1).
void set_worker_count(std::size_t n);
std::size_t worker_count();

/// Splits [0, n) into fixed contiguous chunks, evaluates `chunk_fn` on each
/// (possibly on worker threads) and combines the partial results strictly in
/// chunk order, so the reduction is bit-identical for any worker count.
/// `chunk_fn(begin, end)` returns the chunk's partial value; `combine(acc,
/// partial)` folds it into the running accumulator.
template <typename T>
T parallel_reduce_det(std::size_t n, const T& init,
                      const std::function<T(std::size_t, std::size_t)>& chunk_fn,
                      const std::function<void(T&, const T&)>& combine);

namespace detail {
// Runs fn(i) for each chunk index i on the pool; blocks until done.
void run_chunks(std::size_t num_chunks,
                const std::function<void(std::size_t)>& fn);
std::size_t chunk_count(std::size_t n);
void chunk_bounds(std::size_t n, std::size_t i, std::size_t& b, std::size_t& e);
}  // namespace detail

template <typename T>
T parallel_reduce_det(std::size_t n, const T& init,
                      const std::function<T(std::size_t, std::size_t)>& chunk_fn,
                      const std::function<void(T&, const T&)>& combine) {
  const std::size_t chunks = detail::chunk_count(n);
  std::vector<T> partials(chunks, init);
  detail::run_chunks(chunks, [&](std::size_t i) {
    std::size_t b, e;
    detail::chunk_bounds(n, i, b, e);
    partials[i] = chunk_fn(b, e);
  });
  T acc = init;
  for (const T& p : partials) combine(acc, p);
  return acc;
}

}  // namespace terralio
