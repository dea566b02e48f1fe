#pragma once

#include <cstddef>
#include <functional>

namespace tqd {

/// Worker count from TQD_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index runs exactly
/// once; callers write into per-index slots and reduce afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = thread_count());

}  // namespace tqd
