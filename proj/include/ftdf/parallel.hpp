#pragma once

#include <cstddef>
#include <functional>

namespace ftdf {

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Callers write results into pre-sized slots indexed by i,
/// so output never depends on scheduling. If several calls throw, the
/// exception from the lowest index is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

std::size_t resolve_threads(std::size_t requested);

}  // namespace ftdf
