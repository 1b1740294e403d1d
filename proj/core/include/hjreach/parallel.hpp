#pragma once

#include <cstddef>
#include <functional>

namespace hjreach {

// Worker count used by parallel loops. Reads HJREACH_THREADS once; falls back
// to std::thread::hardware_concurrency(). Always >= 1.
std::size_t thread_count();

// Overrides the worker count for the rest of the process (0 restores the
// environment/default value).
void set_thread_count(std::size_t n);

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint,
// so bodies that only write inside their own range produce results that do
// not depend on the number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hjreach
