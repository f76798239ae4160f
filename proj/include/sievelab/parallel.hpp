#pragma once

#include <cstddef>
#include <functional>

namespace sievelab {

// Global worker cap shared by every module. 0 restores the hardware default.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() workers. Work is handed
// out in contiguous chunks; callers write into index-addressed slots and reduce
// afterwards in index order, so results never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sievelab
