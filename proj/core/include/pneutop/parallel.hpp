#pragma once

#include <cstddef>
#include <functional>

namespace pneutop {

/// Worker count used by element loops. Defaults to 1.
void set_num_threads(int n);
int num_threads();

/// Runs fn(i) for i in [0, n) split into contiguous blocks over the configured
/// workers. Callers must only write to per-index slots so results do not depend
/// on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace pneutop
