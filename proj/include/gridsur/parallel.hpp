#pragma once

#include <functional>

namespace gridsur {

/// Process-wide worker count used by fits and dataset generation helpers.
/// Defaults to 1. Results never depend on it.
void set_worker_count(int n);
[[nodiscard]] int worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. The first
/// exception (by index) is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace gridsur
