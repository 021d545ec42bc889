#pragma once

#include "diswap/simulate.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace diswap::detail {

// Computes per-path results in parallel within fixed-size batches and reduces
// them strictly in path order, so totals do not depend on the thread count.
template <class Slot, class Compute, class Reduce>
void batched_paths(std::size_t n_paths, unsigned threads, Compute&& compute, Reduce&& reduce,
                   std::size_t batch = 2048) {
    std::vector<Slot> slots(std::min(batch, n_paths));
    for (std::size_t start = 0; start < n_paths; start += batch) {
        const std::size_t m = std::min(batch, n_paths - start);
        parallel_for(m, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) compute(start + i, slots[i]);
        });
        for (std::size_t i = 0; i < m; ++i) reduce(start + i, slots[i]);
    }
}

} // namespace diswap::detail
