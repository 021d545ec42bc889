#pragma once

// Discretisation-invariant pay-offs over a vector of martingale prices F and
// their logs x = ln F, plus the classic scalar characteristics they are
// compared against.
//
//   phi(dF, dx) = alpha' dF + dF' Omega dF + beta' (exp(dx) - 1) + gamma' dx
//
// Pay-offs of this form are closed under linear combination, so DiPayoff is a
// value type with vector-space operations.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace diswap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Increment of z = (F, x) over one monitoring interval. dx entries are NaN
/// where the component is not strictly positive at either end.
struct Increment {
    Vector dF;
    Vector dx;

    static Increment zero(Eigen::Index dim);
    /// Builds the increment between two price vectors, taking logs where defined.
    static Increment between(const Vector& prev, const Vector& curr);
};

class DiPayoff {
public:
    DiPayoff() = default;
    /// Omega is replaced by (Omega + Omega') / 2. Throws std::invalid_argument
    /// on size mismatch, non-finite coefficients or a wrong label count.
    DiPayoff(std::vector<std::string> labels, Vector alpha, Matrix omega, Vector beta, Vector gamma);

    /// All-zero pay-off over the given labels.
    static DiPayoff zero(std::vector<std::string> labels);

    Eigen::Index dim() const { return alpha_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const Vector& alpha() const { return alpha_; }
    const Matrix& omega() const { return omega_; }
    const Vector& beta() const { return beta_; }
    const Vector& gamma() const { return gamma_; }

    /// True when component j enters through its log (beta_j or gamma_j nonzero).
    bool uses_log(Eigen::Index j) const { return beta_[j] != 0.0 || gamma_[j] != 0.0; }

    /// phi evaluated at an increment. Throws std::invalid_argument on dimension
    /// mismatch and std::domain_error when a log component has no defined dx.
    double evaluate(const Increment& inc) const;

    bool operator==(const DiPayoff& other) const;

private:
    std::vector<std::string> labels_;
    Vector alpha_;
    Matrix omega_;
    Vector beta_;
    Vector gamma_;
};

/// a * p1 + b * p2, coefficient-wise. Labels must agree exactly.
DiPayoff combine(double a, const DiPayoff& p1, double b, const DiPayoff& p2);

/// Log variance pay-off 2(e^dx - 1 - dx) embedded over labels (F, X).
DiPayoff log_variance_payoff();

/// Exact binomial coefficient; rejects n > 20 so the moment weights never overflow.
std::int64_t binomial(int n, int k);

/// Integer part of the i-th moment weight, sum_{j=i+1}^{n} C(n,j)(-1)^{n-j}.
std::int64_t moment_weight_sum(int n, int i);
/// Same quantity through the complementary sum, -sum_{j=0}^{i} C(n,j)(-1)^{n-j}.
std::int64_t moment_weight_sum_complement(int n, int i);

/// Label for the k-th power log contract: "X" for k = 1, "X<k>" otherwise.
std::string power_log_label(int k);
std::string put_label(double strike);
std::string call_label(double strike);

/// n-th moment swap pay-off over (X, X2, ..., X<n-1>) centred at X0.
DiPayoff moment_payoff(int n, double X0);

/// Weights omega_i for i = 1..n-1 (index 0 holds omega_1).
std::vector<double> moment_weights(int n, double X0);

/// Straddle swap pay-off over (P@k1..P@kd, C@k1..C@kd) with Omega = [[0, W/2], [W'/2, 0]].
/// W must be lower triangular and strikes strictly ascending.
DiPayoff straddle_payoff(const Matrix& omega_tilde, const std::vector<double>& strikes);

enum class ClassicKind { SquaredLogReturn, LogVariance, EntropyVariance, Tau, NeubergerPsi };

std::string to_string(ClassicKind kind);
ClassicKind classic_kind_from_string(const std::string& name);

/// Scalar characteristic of a log return. v_hat is required for NeubergerPsi and
/// rejected for the others.
double classic_eval(ClassicKind kind, double x_hat, std::optional<double> v_hat = std::nullopt);

/// First and second derivative of a single-variable classic characteristic,
/// each minus its value at zero, in a form that is exact at x_hat = 0.
struct ClassicShifts {
    double d1;
    double d2;
};
ClassicShifts classic_derivative_shifts(ClassicKind kind, double x_hat);

/// Classic characteristic of the underlying's log return, used where a
/// non-invariant benchmark is compared against DiPayoffs.
struct ClassicPayoff {
    ClassicKind kind = ClassicKind::SquaredLogReturn;
};

} // namespace diswap
