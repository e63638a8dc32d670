#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace corrdetect {

// Worker count used by every Monte Carlo routine. 1 is the canonical
// configuration for regression fixtures.
unsigned default_threads();
void set_default_threads(unsigned n);

inline constexpr std::size_t kChunkSize = 1024;

// Splits [0, total) into fixed-size chunks, evaluates fn(chunk_index, begin,
// end) on a pool of workers and returns the per-chunk results in chunk order.
// Chunk boundaries do not depend on the worker count, so any reduction done
// in order by the caller is reproducible.
template <class Result, class Fn>
std::vector<Result> run_chunks(std::size_t total, Fn&& fn, unsigned threads = 0,
                               std::size_t chunk = kChunkSize) {
  const std::size_t n_chunks = (total + chunk - 1) / chunk;
  std::vector<Result> out(n_chunks);
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n_chunks, 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        const std::size_t b = c * chunk;
        out[c] = fn(c, b, std::min(total, b + chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// Running first and second moments with Neumaier-compensated sums.
struct MomentAccumulator {
  double sum = 0.0, sum_c = 0.0;
  double sq = 0.0, sq_c = 0.0;
  std::size_t count = 0;

  void add(double x);
  void merge(const MomentAccumulator& other);
  double mean() const;
  double variance() const;  // unbiased
  double stderr_of_mean() const;
};

}  // namespace corrdetect
