#pragma once

// Conditional moments of the martingale vector at one valuation time:
//   F     current values
//   Sigma E_t[F_T F_T']
//   X     E_t[ln F_T] per component
//   x     ln F (NaN where a component is not positive)
//
// Entries that cannot be determined from the available information are NaN.
// Pricing and hedging only reject a state when a NaN entry is actually needed.

#include "diswap/payoffs.hpp"

#include <string>
#include <vector>

namespace diswap {

struct MarketState {
    std::vector<std::string> labels;
    Vector F;
    Matrix Sigma;
    Vector X;
    Vector x;

    MarketState() = default;
    /// Validates sizes, symmetry and Sigma - F F' >= 0 on the fully known block.
    /// Throws std::invalid_argument.
    MarketState(std::vector<std::string> labels, Vector F, Matrix Sigma, Vector X);

    /// State at maturity: Sigma = F F' and X = ln F exactly.
    static MarketState terminal(std::vector<std::string> labels, const Vector& F);

    Eigen::Index dim() const { return F.size(); }
};

/// Tolerance for the positive semi-definite check on Sigma - F F'.
inline constexpr double kPsdTolerance = 1e-10;

} // namespace diswap
