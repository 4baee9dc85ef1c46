#pragma once

#include <cstddef>
#include <functional>

namespace vitdd {

/// Runs fn(0..n) across up to `threads` workers. Callers must write results
/// into per-index slots (or otherwise disjoint state) so the outcome is
/// independent of scheduling; reductions happen after the join, in index
/// order. threads <= 1 runs inline.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace vitdd
