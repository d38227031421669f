// Copyright The convspectra Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef CONVSPECTRA_PARALLEL_HPP
#define CONVSPECTRA_PARALLEL_HPP

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace convspectra
{

/// Worker count 0 means one per hardware thread.
inline std::size_t resolve_workers(std::size_t workers)
{
  if (workers > 0)
    return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

//
// Splits [0, count) into at most `workers` contiguous ranges and runs
// body(worker, begin, end) on each. Ranges are fixed by (count, workers) alone, so any
// per-element computation is identical regardless of scheduling. The first exception
// thrown by a worker is rethrown on the calling thread after all workers join.
//
template <typename Body>
void parallel_ranges(std::size_t count, std::size_t workers, Body &&body)
{
  workers = std::max<std::size_t>(1, std::min(resolve_workers(workers), count));
  if (workers <= 1)
  {
    if (count > 0)
      body(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t base = count / workers, extra = count % workers;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < workers; ++w)
  {
    const std::size_t end = begin + base + (w < extra ? 1 : 0);
    pool.emplace_back(
        [&, w, begin, end]
        {
          try
          {
            body(w, begin, end);
          }
          catch (...)
          {
            errors[w] = std::current_exception();
          }
        });
    begin = end;
  }
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

class Stopwatch
{
public:
  Stopwatch() : start_(clock::now()) {}
  void restart() { start_ = clock::now(); }
  double seconds() const { return std::chrono::duration<double>(clock::now() - start_).count(); }

private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

} // namespace convspectra

#endif // CONVSPECTRA_PARALLEL_HPP
