#include "diswap/swaps.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace diswap {

namespace {

void check_labels(const DiPayoff& payoff, const MarketState& state) {
    if (payoff.dim() != state.dim())
        throw std::invalid_argument("dimension mismatch: pay-off has " + std::to_string(payoff.dim()) +
                                    " components, state has " + std::to_string(state.dim()));
    if (payoff.labels() != state.labels) throw std::invalid_argument("pay-off and state labels differ");
}

} // namespace

FairValue fair_value(const DiPayoff& payoff, const MarketState& state) {
    check_labels(payoff, state);
    const auto d = payoff.dim();
    const auto& omega = payoff.omega();
    const auto& gamma = payoff.gamma();
    double quad = 0.0;
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            if (omega(a, b) == 0.0) continue;
            const double s = state.Sigma(a, b);
            if (std::isnan(s))
                throw std::invalid_argument("state has no value for E[" + state.labels[a] + " * " + state.labels[b] +
                                            "] at maturity");
            quad += omega(a, b) * (s - state.F[a] * state.F[b]);
        }
    }
    double log_term = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (gamma[j] == 0.0) continue;
        if (std::isnan(state.X[j]) || std::isnan(state.x[j]))
            throw std::invalid_argument("state has no log contract for component '" + state.labels[j] + "'");
        log_term += gamma[j] * (state.X[j] - state.x[j]);
    }
    return {quad + log_term, quad, log_term};
}

double moment_rate(int n, const std::vector<double>& X_powers) {
    if (n < 2) throw std::invalid_argument("moment_rate: n must be at least 2");
    if (static_cast<int>(X_powers.size()) < n)
        throw std::invalid_argument("moment_rate: expected " + std::to_string(n) + " power log prices, got " +
                                    std::to_string(X_powers.size()));
    const double m = -X_powers[0];
    double v = std::pow(m, n);
    for (int i = 1; i <= n; ++i)
        v += static_cast<double>(binomial(n, i)) * std::pow(m, n - i) * X_powers[static_cast<std::size_t>(i - 1)];
    return v;
}

MarketState moment_state(int n, const std::vector<double>& X_powers) {
    if (n < 2) throw std::invalid_argument("moment_state: n must be at least 2");
    const auto needed = static_cast<std::size_t>(2 * n - 2);
    if (X_powers.size() < needed)
        throw std::invalid_argument("moment_state: a moment swap of order " + std::to_string(n) +
                                    " needs power log contracts up to order " + std::to_string(needed));
    const Eigen::Index d = n - 1;
    std::vector<std::string> labels;
    Vector F(d);
    Matrix Sigma(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        labels.push_back(power_log_label(static_cast<int>(a) + 1));
        F[a] = X_powers[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b < d; ++b) Sigma(a, b) = X_powers[static_cast<std::size_t>(a + b + 1)];
    }
    return MarketState(std::move(labels), F, Sigma, Vector::Constant(d, std::numeric_limits<double>::quiet_NaN()));
}

double straddle_rate(const Vector& P0, const Vector& C0, const Matrix& omega_tilde) {
    const auto d = P0.size();
    if (C0.size() != d || omega_tilde.rows() != d || omega_tilde.cols() != d)
        throw std::invalid_argument("straddle_rate: length mismatch");
    return -P0.dot(omega_tilde * C0);
}

} // namespace diswap
