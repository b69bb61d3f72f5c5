#pragma once

#include <cstddef>
#include <functional>

namespace hogs {

/// Worker count used by render/backward. Defaults to hardware concurrency,
/// overridden by HOGS_THREADS or set_thread_count.
int thread_count();
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n). Work items must write disjoint outputs;
/// results are then independent of the worker count.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace hogs
