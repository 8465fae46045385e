#pragma once

#include <cstddef>
#include <functional>

namespace pcfill {

// Process-wide worker count for parallel_for (1 = serial). Parallel loops
// only ever partition independent output slots, so results are identical
// for every thread count.
void set_num_threads(int n);
int num_threads();

// Runs fn(i) for i in [0, n). Static block partitioning, no reductions.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pcfill
