#pragma once

// Fair-value swap rates.

#include "diswap/payoffs.hpp"
#include "diswap/state.hpp"

#include <vector>

namespace diswap {

struct FairValue {
    double value;
    double quadratic_term;  // tr(Omega [Sigma - F F'])
    double log_term;        // gamma' (X - x)
};

/// v = tr(Omega [Sigma - F F']) + gamma' (X - x). Labels must match. Unknown (NaN)
/// state entries are only an error where the pay-off gives them weight.
FairValue fair_value(const DiPayoff& payoff, const MarketState& state);

/// n-th moment swap rate from (X, X2, ..., Xn), the binomial central-moment form. Extra powers are ignored.
double moment_rate(int n, const std::vector<double>& X_powers);

/// State over (X, X2, ..., X<n-1>) with Sigma_ab = X<a+b>. Needs powers up to 2n - 2.
MarketState moment_state(int n, const std::vector<double>& X_powers);

/// -P0' W C0.
double straddle_rate(const Vector& P0, const Vector& C0, const Matrix& omega_tilde);

/// Floating-for-floating exchange of one pay-off on nested partitions.
inline double frequency_rate() { return 0.0; }
inline double calendar_rate(double v_long, double v_short) { return v_long - v_short; }

} // namespace diswap
