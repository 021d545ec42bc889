#pragma once

// Monte Carlo and analytic checks of discretisation invariance.

#include "diswap/payoffs.hpp"
#include "diswap/simulate.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace diswap {

/// A pay-off whose realised leg can be simulated: a DiPayoff over labelled
/// instruments, or a classic characteristic of the forward's log return.
using Characteristic = std::variant<DiPayoff, ClassicPayoff>;

std::string describe(const Characteristic& c);
/// Instruments that must be valued along each path.
std::vector<std::string> required_labels(const Characteristic& c);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n_paths = 0;
};

/// Mean and standard error of sum_Pi phi over simulated paths.
Estimate estimate_rate(const Characteristic& payoff, const ModelSpec& model, const Partition& partition,
                       std::size_t n_paths, std::uint64_t seed, unsigned threads = 0);

struct PartitionEstimate {
    std::string label;
    Estimate leg;
    Estimate difference;  // paired leg minus the reference leg
    double z = 0.0;
};

struct ApVerdict {
    std::string payoff_label;
    std::string model_label;
    Estimate reference;  // trivial partition, E[phi(z_T - z_0)]
    std::vector<PartitionEstimate> partitions;
    double max_abs_z = 0.0;
    double z_threshold = 4.0;
    bool pass = false;
    /// max |phi*(x_prev, x) - phi(z_hat)| over checked steps; NaN when not applicable.
    double dual_form_max_error = 0.0;
    std::size_t dual_form_steps = 0;
};

/// Simulates once on the union of the partitions and the trivial one, then
/// compares every partition's paired realised leg with the trivial leg.
std::vector<ApVerdict> ap_check(const std::vector<Characteristic>& payoffs, const ModelSpec& model,
                                const std::vector<Partition>& partitions, std::size_t n_paths, std::uint64_t seed,
                                double z_threshold = 4.0, unsigned threads = 0);
ApVerdict ap_check(const Characteristic& payoff, const ModelSpec& model, const std::vector<Partition>& partitions,
                   std::size_t n_paths, std::uint64_t seed, double z_threshold = 4.0, unsigned threads = 0);

/// z-score of a paired difference; zero-variance differences score 0 when they
/// vanish to rounding and infinity otherwise.
double paired_z(const Estimate& difference, double scale);

/// Dual form: phi evaluated at (e^x - e^x_prev, x - x_prev).
double dual_form(const DiPayoff& payoff, const Vector& x_prev, const Vector& x_curr);

struct DeltaReport {
    Estimate delta;  // paired E[leg on the partition - leg on its refinement]
    Estimate coarse;
    Estimate fine;
    int fine_factor = 64;
};

DeltaReport delta_n(const Characteristic& payoff, const ModelSpec& model, const Partition& partition,
                    std::size_t n_paths, int fine_factor, std::uint64_t seed, unsigned threads = 0);

struct FrequencyEstimate {
    Estimate difference;      // leg on the fine partition minus leg on the coarse one
    double max_abs_difference = 0.0;
};

FrequencyEstimate frequency_estimate(const DiPayoff& payoff, const ModelSpec& model, const Partition& fine,
                                     const Partition& coarse, std::size_t n_paths, std::uint64_t seed,
                                     unsigned threads = 0);

struct ResidualPoint {
    Vector F_hat;
    Vector x_hat;
    Vector F;
};

enum class DerivativeMode { Analytic, FiniteDifference };

struct ResidualReport {
    std::vector<ResidualPoint> points;
    std::vector<Matrix> residuals;
    double max_norm = 0.0;
    DerivativeMode mode = DerivativeMode::Analytic;
    double h = 0.0;
};

/// phi as a function of (dF, dx).
using Candidate = std::function<double(const Vector&, const Vector&)>;

Candidate as_candidate(const DiPayoff& payoff);
Candidate as_candidate(ClassicKind kind);

ResidualReport pde_residual(const DiPayoff& payoff, const std::vector<ResidualPoint>& points);
/// Single-component classic characteristic with z = (F, x).
ResidualReport pde_residual(ClassicKind kind, const std::vector<ResidualPoint>& points);
/// Central differences with step h * max(1, |z_i|) on every coordinate.
ResidualReport pde_residual_fd(const Candidate& phi, Eigen::Index dim, const std::vector<ResidualPoint>& points,
                               double h = 1e-4);

struct ConvergenceStudy {
    std::vector<double> h;
    std::vector<double> max_norm;
    double order = 0.0;     // least-squares slope of log norm against log h
    double constant = 0.0;  // C in norm ~ C h^order
};

/// Measures the finite-difference residual at a sequence of steps. For solutions
/// of the PDE the residual is pure discretisation error.
ConvergenceStudy fd_convergence(const Candidate& phi, Eigen::Index dim, const std::vector<ResidualPoint>& points,
                                const std::vector<double>& steps = {1e-2, 5e-3, 2.5e-3});

/// Random points with F in [0.5, 2], dF in [-0.5, 0.5] and dx in [-0.3, 0.3].
std::vector<ResidualPoint> random_points(Eigen::Index dim, std::size_t count, std::uint64_t seed);

struct PremiumReport {
    Estimate realised;              // physical-measure realised leg
    double realised_variance = 0.0;
    double fair_value = 0.0;        // risk-neutral expectation of the realised leg
    double fair_value_se = 0.0;
    double premium = 0.0;
    double premium_se = 0.0;
    std::string method;             // "fair-value" or "paired"
    std::vector<double> times;
    std::vector<double> realised_series;  // mean cumulative realised leg
    std::vector<double> implied_series;   // mean cumulative implied leg
};

/// DiPayoffs are priced by their fair value; classic pay-offs by a paired simulation
/// under the pricing measure with the same random numbers.
PremiumReport premium_study(const Characteristic& payoff, const ModelSpec& model, const Partition& partition,
                            std::size_t n_paths, std::uint64_t seed, unsigned threads = 0);

} // namespace diswap
