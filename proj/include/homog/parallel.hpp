#pragma once

#include <cstddef>
#include <functional>

namespace homog {

/// Worker count: explicit request if > 0, else HOMOG_WORKERS, else the
/// hardware concurrency.
std::size_t resolve_workers(std::size_t requested = 0);

/// Runs body(begin, end) over [0, count) split into fixed blocks of
/// `block` indices. Block boundaries do not depend on the worker count, and
/// body must only write to per-index outputs, so results are identical for any
/// number of workers. Exceptions from workers are rethrown.
void parallel_blocks(std::size_t count, std::size_t block, std::size_t workers,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace homog
