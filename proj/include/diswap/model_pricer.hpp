#pragma once

// Analytic values of labelled instruments (forward, power log contracts,
// vanillas and their products) under a model's risk-neutral conditional law.

#include "diswap/claims.hpp"
#include "diswap/simulate.hpp"
#include "diswap/state.hpp"

#include <limits>
#include <string>
#include <vector>

namespace diswap {

struct LogNormalComponent {
    double weight;
    double mean;
    double var;
};

/// Law of ln F_T given F_t as a Gaussian mixture (one component for GBM, a
/// truncated Poisson mixture for MertonJump). Not available for Heston.
std::vector<LogNormalComponent> conditional_law(const ModelSpec& model, double F_t, double tau);

class ModelPricer {
public:
    /// Heston supports only "F" and "X". Throws std::invalid_argument otherwise.
    ModelPricer(ModelSpec model, double T, std::vector<std::string> labels);

    const std::vector<std::string>& labels() const { return labels_; }
    const ModelSpec& model() const { return model_; }
    double maturity() const { return T_; }

    /// Values of all labelled instruments at time t. v_t is the Heston variance.
    void values(double t, double F_t, double v_t, double* out) const;
    Vector values(double t, double F_t, double v_t = kNoVariance) const;

    /// Full snapshot including Sigma = E_t[F_T F_T'] and X = E_t[ln F_T].
    /// At maturity this is MarketState::terminal.
    MarketState state(double t, double F_t, double v_t = kNoVariance) const;

    static constexpr double kNoVariance = std::numeric_limits<double>::quiet_NaN();

private:
    bool at_maturity(double t) const { return t >= T_ * (1.0 - 1e-12); }
    double expected_log(double t, double F_t, double v_t) const;
    double expectation(const TerminalClaim& claim, const std::vector<LogNormalComponent>& law) const;

    ModelSpec model_;
    double T_;
    std::vector<std::string> labels_;
    std::vector<TerminalClaim> claims_;
    std::vector<int> kind_;  // 0 forward, 1 log, 2 other
    std::vector<TerminalClaim> products_;  // upper triangle, row-major
};

} // namespace diswap
