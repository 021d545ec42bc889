#pragma once

// Black-76 option chains and Carr-Madan replication of smooth terminal claims
// (power log contracts in particular) from out-of-the-money forward options.

#include "diswap/state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace diswap {

double black76_call(double F, double k, double sigma, double tau);
double black76_put(double F, double k, double sigma, double tau);
double black76(double F, double k, double sigma, double tau, bool is_call);

struct OptionChain {
    double F = 0.0;
    double T_remaining = 0.0;
    std::vector<double> strikes;
    std::vector<double> puts;
    std::vector<double> calls;

    /// Checks ascending positive strikes, equal lengths and the no-arbitrage bounds
    /// max(F - k, 0) <= C <= F and max(k - F, 0) <= P <= k.
    void validate() const;
    std::size_t size() const { return strikes.size(); }
    /// Out-of-the-money price at strike i relative to a separation strike.
    double otm(std::size_t i, double separation) const {
        return strikes[i] <= separation ? puts[i] : calls[i];
    }
};

struct StrikeGrid {
    double k_min;
    double k_max;
    int n_strikes;

    /// Log-uniform strikes from k_min to k_max inclusive.
    std::vector<double> strikes() const;
};

/// Log-uniform grid over [F0 exp(-width sigma sqrt(T)), F0 exp(width sigma sqrt(T))].
StrikeGrid default_grid(double F0, double sigma, double T, int n_strikes = 4096, double width = 10.0);

OptionChain black76_chain(double F, double sigma, double tau, const std::vector<double>& strikes);

/// Carr-Madan weight of the n-th power log contract, n (ln k)^(n-2) k^-2 (n - 1 - ln k).
double cm_weight(int n, double k);

/// Trapezoid weights in log strike, w_i = k_i (u_{i+1} - u_{i-1}) / 2 with u = ln k,
/// so that sum_i w_i f(k_i) approximates the integral of f dk over the grid.
std::vector<double> strike_weights(const std::vector<double>& strikes);

/// E_t[(ln F_T)^n] = g(a) + g'(a)(F - a) + int g''(k) q(k) dk with g(F) = (ln F)^n and
/// separation a (default the current forward). x_t must equal ln chain.F.
double power_log_price(const OptionChain& chain, int n, double x_t, std::optional<double> separation = std::nullopt);

/// E_t[(ln F_T)^power * F_T^expo] by the same replication, separated at the forward.
double chain_expectation(const OptionChain& chain, int power, int expo);

struct BuyAndHold {
    int n = 1;
    double constant = 0.0;
    double forward_units = 0.0;
    double forward_reference = 0.0;
    std::vector<double> strikes;
    std::vector<double> put_weights;
    std::vector<double> call_weights;

    /// Portfolio value on a later chain quoted at the same strikes.
    double value(const OptionChain& chain) const;
};

/// Static portfolio x0^n + n x0^(n-1) (F_t - F0)/F0 + puts below F0 + calls above F0.
BuyAndHold buy_and_hold_portfolio(int n, const OptionChain& chain0);

/// CSV with columns strike,put,call. F is inferred from put-call parity when not given.
OptionChain read_chain_csv(const std::string& path, double T_remaining, std::optional<double> F = std::nullopt);
std::string chain_csv(const OptionChain& chain);

/// Market state over the given labels, built from the chain. Products of vanillas
/// are known only for a put struck at or below a call (where they vanish); others are NaN.
MarketState chain_state(const OptionChain& chain, const std::vector<std::string>& labels);

} // namespace diswap
