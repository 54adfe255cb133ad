#pragma once

#include <cstddef>
#include <functional>

namespace fermikin
{

/// Number of worker threads: hardware concurrency, capped by FERMIKIN_THREADS.
std::size_t worker_count();

/// Runs body(begin, end) over a static partition of [0, n).
///
/// Each index is visited by exactly one worker and the partition only decides
/// which thread runs which block, so results written per index are identical
/// for every worker count.
void parallel_for(std::size_t n, std::function<void(std::size_t, std::size_t)> const& body);

}  // namespace fermikin
