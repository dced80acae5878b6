#pragma once

#include <cstddef>
#include <functional>

namespace conescale {

// Process-wide worker count for data-parallel loops. Results never depend on it.
void set_thread_count(int count);
int thread_count();

// Calls body(begin, end) on disjoint chunks covering [0, count).
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace conescale
