#pragma once

// Swap value increments, their realised/implied split and the replicating
// portfolios that reproduce them.

#include "diswap/payoffs.hpp"
#include "diswap/simulate.hpp"
#include "diswap/state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace diswap {

/// Increment between two snapshots: dF = F - F_prev, dx = x - x_prev.
Increment state_increment(const MarketState& prev, const MarketState& curr);

/// alpha' dF + tr(Omega [dSigma - 2 F_prev dF']) + beta' (e^dx - 1) + gamma' dX.
double value_increment(const DiPayoff& payoff, const MarketState& prev, const MarketState& curr);

struct Decomposition {
    double realised;  // phi of the monitored increment
    double implied;   // change in the residual swap rate
};
Decomposition decompose(const DiPayoff& payoff, const MarketState& prev, const MarketState& curr);

/// Holdings over one interval: forward_units in each component, product_units in the
/// contracts paying F_a F_b at maturity and log_units in the log contracts.
struct HedgeHoldings {
    Vector forward_units;
    Matrix product_units;
    Vector log_units;
};

/// forward_units = alpha + beta / F_prev - 2 Omega F_prev, product_units = Omega,
/// log_units = gamma.
HedgeHoldings hedge_holdings(const DiPayoff& payoff, const MarketState& prev);
/// P&L of the holdings from prev to curr.
double hedge_increment(const HedgeHoldings& holdings, const MarketState& prev, const MarketState& curr);

/// Moment swap hedge written in power log contracts:
///   V = dX<n> - sum_{k<n} h_k dX<k>
struct MomentHedge {
    int n;
    std::vector<double> h;  // h[k - 1] for k = 1..n-1

    /// dX holds the increments of (X, X2, ..., Xn).
    double increment(const std::vector<double>& dX) const;
};
/// prev_powers holds (X, X2, ..., X<n-1>) at the start of the interval.
MomentHedge moment_hedge_ratios(int n, double X0, const std::vector<double>& prev_powers);

/// -P_prev dC - C_prev dP.
double straddle_hedge_increment(double P_prev, double C_prev, double P_hat, double C_hat);

/// Running difference of the realised legs on the fine and the coarse partition
/// up to and including time t. values_m holds component values at every time of pm.
double frequency_mtm(const DiPayoff& payoff, const std::vector<Vector>& values_m, const Partition& pm,
                     const Partition& ph, double t);

/// Constant-maturity P&L from two fixed-maturity swaps bracketing t + tau. Works on the
/// value increments, never on swap rates: increment i over (t_{i-1}, t_i] is
///   w V_near + (1 - w) V_far,  w = (T_far - t_{i-1} - tau) / (T_far - T_near).
std::vector<double> constant_maturity_increments(const Partition& times, const std::vector<double>& near_increments,
                                                 double T_near, const std::vector<double>& far_increments, double T_far,
                                                 double tau);

struct HedgeReport {
    Partition times;
    std::size_t n_paths = 0;
    double v0 = 0.0;
    std::vector<double> value_path;     // mean V_t
    std::vector<double> realised;       // mean cumulative realised leg
    std::vector<double> implied;        // mean cumulative implied leg
    std::vector<double> increment_mean; // mean V increment over (t_{i-1}, t_i]
    std::vector<double> increment_se;
    std::vector<double> residual;       // max |V_t - replicating portfolio| across paths
    std::vector<Vector> hedge_positions;  // forward units held over (t_i, t_{i+1}] on path 0
    double max_step_error = 0.0;        // max |value increment - hedge increment|
    double max_terminal_error = 0.0;    // max |V_T - (sum phi - v0)|
    double terminal_mean = 0.0;
    double terminal_sd = 0.0;
};

/// Analytic-state hedge simulation with rebalancing at every monitoring time.
HedgeReport hedge_simulation(const DiPayoff& payoff, const ModelSpec& model, const Partition& partition,
                             std::size_t n_paths, std::uint64_t seed, unsigned threads = 0);

} // namespace diswap
