#pragma once

#include <cstddef>
#include <functional>

namespace bsde {

// Deterministic parallelism: work is split into blocks whose boundaries depend
// only on the item count, never on the thread count. Per-block results must be
// combined in block order by the caller, so every floating-point reduction is
// schedule-independent.

struct BlockRange {
    std::size_t begin;
    std::size_t end;
};

/// Number of worker threads to use; 0 resolves to the hardware concurrency.
unsigned resolve_threads(unsigned threads);

/// Fixed block count for `count` items (independent of the thread count).
std::size_t block_count_for(std::size_t count);

/// Runs fn(block_index, range) for every block of [0, count). Blocks are claimed
/// dynamically by worker threads; fn must only write to block-indexed slots.
void for_each_block(std::size_t count, unsigned threads,
                    const std::function<void(std::size_t, BlockRange)>& fn);

/// Runs fn(i) for every i in [0, count) with no cross-iteration reduction.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace bsde
