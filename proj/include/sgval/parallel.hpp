#pragma once

#include <cstddef>
#include <functional>

namespace sgval {

/// Caps worker threads used by parallel_for. 0 restores the default
/// (hardware concurrency).
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, count). Chunk
/// boundaries depend on the thread count, so callers must write results
/// into per-index slots and reduce afterwards in index order.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1);

}  // namespace sgval
