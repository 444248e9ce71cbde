#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace pcc {

// SplitMix64 mixing of (master, index): independent-looking seeds for
// replicate jobs that do not depend on how jobs are scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Runs body(i) for i in [0, n) on up to `threads` workers (0 means the
// hardware concurrency). Exceptions escaping body are rethrown after all
// workers finish; the one from the smallest index wins.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

int resolve_threads(int threads);

}  // namespace pcc
