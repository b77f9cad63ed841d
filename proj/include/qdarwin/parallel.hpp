#pragma once

// Minimal index-parallel loop for embarrassingly parallel table fills.
// Worker count: QDARWIN_THREADS if set (>= 1), else hardware concurrency.
// Each index writes only its own output slot, so results are identical for
// any thread count.

#include <cstddef>
#include <functional>

namespace qdarwin {

std::size_t worker_count();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qdarwin
