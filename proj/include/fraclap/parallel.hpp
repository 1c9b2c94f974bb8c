#ifndef FRACLAP_PARALLEL_HPP
#define FRACLAP_PARALLEL_HPP

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace fraclap {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs compute(begin,end) over fixed-size blocks of [0,n_items) and merges
/// the per-block results strictly in block order.  The block layout depends
/// only on (n_items, block_size), so the floating-point reduction order is
/// identical for every worker count.
template <class Result>
void parallel_blocks(std::int64_t n_items, std::int64_t block_size, int workers,
                     const std::function<Result(std::int64_t, std::int64_t)>& compute,
                     const std::function<void(Result&)>& merge) {
  if (n_items <= 0) return;
  workers = resolve_workers(workers);
  const std::int64_t n_blocks = (n_items + block_size - 1) / block_size;

  if (workers == 1 || n_blocks == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) {
      Result r = compute(b * block_size, std::min(n_items, (b + 1) * block_size));
      merge(r);
    }
    return;
  }

  std::mutex mu;
  std::condition_variable cv_ready, cv_space;
  std::map<std::int64_t, Result> done;
  std::int64_t next_take = 0, next_merge = 0;
  const std::int64_t inflight_cap = 4 * static_cast<std::int64_t>(workers);

  auto work = [&] {
    while (true) {
      std::int64_t b;
      {
        std::unique_lock<std::mutex> lk(mu);
        cv_space.wait(lk, [&] { return next_take >= n_blocks || next_take - next_merge < inflight_cap; });
        if (next_take >= n_blocks) return;
        b = next_take++;
      }
      Result r = compute(b * block_size, std::min(n_items, (b + 1) * block_size));
      {
        std::lock_guard<std::mutex> lk(mu);
        done.emplace(b, std::move(r));
      }
      cv_ready.notify_all();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);

  while (true) {
    Result r;
    {
      std::unique_lock<std::mutex> lk(mu);
      if (next_merge >= n_blocks) break;
      cv_ready.wait(lk, [&] { return done.count(next_merge) > 0; });
      auto it = done.find(next_merge);
      r = std::move(it->second);
      done.erase(it);
    }
    merge(r);
    {
      std::lock_guard<std::mutex> lk(mu);
      ++next_merge;
    }
    cv_space.notify_all();
  }
  cv_space.notify_all();
  for (auto& t : pool) t.join();
}

}  // namespace fraclap

#endif
