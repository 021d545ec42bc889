#pragma once

#include <cmath>
#include <cstddef>

namespace diswap {

/// Welford accumulator. Feeding values in a fixed order gives bit-identical results.
struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }
    double se() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

} // namespace diswap
