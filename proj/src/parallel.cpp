#include "gridsur/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gridsur {

namespace {
std::atomic<int> g_workers{1};
thread_local bool t_in_pool = false;
}

void set_worker_count(int n) { g_workers = std::clamp(n, 1, 256); }

int worker_count() { return g_workers; }

void parallel_for(int n, const std::function<void(int)>& fn) {
  // Nested calls run inline so that thread counts do not multiply.
  const int workers = t_in_pool ? 1 : std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_at = n;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        t_in_pool = true;
        for (int i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (i < failed_at) {
              failed_at = i;
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gridsur
