#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace eivpd {

//! Worker count from EIV_THREADS, else hardware concurrency.
inline int default_threads()
{
  if (const char* env = std::getenv("EIV_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0)
      return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

//! Calls fn(i) for i in [0, count) on up to `threads` workers. Each index is
//! processed exactly once; callers write results by index, so output does
//! not depend on scheduling. The first exception is rethrown.
template<class Fn>
void parallel_for(int count, int threads, Fn&& fn)
{
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<int> next{ 0 };
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back(work);
  for (auto& th : pool)
    th.join();
  if (error)
    std::rethrow_exception(error);
}

} // namespace eivpd
