#include "diswap/payoffs.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace diswap {

namespace {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

std::string format_strike(double k) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), k);
    return std::string(buf, res.ptr);
}

} // namespace

Increment Increment::zero(Eigen::Index dim) { return {Vector::Zero(dim), Vector::Zero(dim)}; }

Increment Increment::between(const Vector& prev, const Vector& curr) {
    if (prev.size() != curr.size())
        throw std::invalid_argument("Increment::between: size mismatch");
    Increment inc;
    inc.dF = curr - prev;
    inc.dx.resize(prev.size());
    for (Eigen::Index j = 0; j < prev.size(); ++j) {
        inc.dx[j] = (prev[j] > 0.0 && curr[j] > 0.0) ? std::log(curr[j]) - std::log(prev[j])
                                                     : std::numeric_limits<double>::quiet_NaN();
    }
    return inc;
}

DiPayoff::DiPayoff(std::vector<std::string> labels, Vector alpha, Matrix omega, Vector beta, Vector gamma)
    : labels_(std::move(labels)), alpha_(std::move(alpha)), beta_(std::move(beta)), gamma_(std::move(gamma)) {
    const auto d = alpha_.size();
    if (d < 1) throw std::invalid_argument("DiPayoff: dimension must be positive");
    if (omega.rows() != d || omega.cols() != d || beta_.size() != d || gamma_.size() != d)
        throw std::invalid_argument("DiPayoff: coefficient dimensions disagree");
    if (static_cast<Eigen::Index>(labels_.size()) != d)
        throw std::invalid_argument("DiPayoff: expected " + std::to_string(d) + " labels");
    if (!all_finite(alpha_) || !all_finite(omega) || !all_finite(beta_) || !all_finite(gamma_))
        throw std::invalid_argument("DiPayoff: coefficients must be finite");
    omega_ = 0.5 * (omega + omega.transpose());
}

DiPayoff DiPayoff::zero(std::vector<std::string> labels) {
    const auto d = static_cast<Eigen::Index>(labels.size());
    return DiPayoff(std::move(labels), Vector::Zero(d), Matrix::Zero(d, d), Vector::Zero(d), Vector::Zero(d));
}

double DiPayoff::evaluate(const Increment& inc) const {
    const auto d = dim();
    if (inc.dF.size() != d || inc.dx.size() != d)
        throw std::invalid_argument("DiPayoff::evaluate: increment has dimension " +
                                    std::to_string(inc.dF.size()) + ", pay-off has " + std::to_string(d));
    double value = alpha_.dot(inc.dF) + inc.dF.dot(omega_ * inc.dF);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!uses_log(j)) continue;
        const double dx = inc.dx[j];
        if (!std::isfinite(dx))
            throw std::domain_error("DiPayoff::evaluate: component '" + labels_[j] +
                                    "' needs a log increment but its price is not positive");
        value += beta_[j] * std::expm1(dx) + gamma_[j] * dx;
    }
    return value;
}

bool DiPayoff::operator==(const DiPayoff& other) const {
    return labels_ == other.labels_ && alpha_ == other.alpha_ && omega_ == other.omega_ &&
           beta_ == other.beta_ && gamma_ == other.gamma_;
}

DiPayoff combine(double a, const DiPayoff& p1, double b, const DiPayoff& p2) {
    if (p1.dim() != p2.dim()) throw std::invalid_argument("combine: dimension mismatch");
    if (p1.labels() != p2.labels()) throw std::invalid_argument("combine: label mismatch");
    return DiPayoff(p1.labels(), a * p1.alpha() + b * p2.alpha(), a * p1.omega() + b * p2.omega(),
                    a * p1.beta() + b * p2.beta(), a * p1.gamma() + b * p2.gamma());
}

DiPayoff log_variance_payoff() {
    Vector beta(2), gamma(2);
    beta << 2.0, 0.0;
    gamma << -2.0, 0.0;
    return DiPayoff({"F", "X"}, Vector::Zero(2), Matrix::Zero(2, 2), beta, gamma);
}

std::int64_t binomial(int n, int k) {
    if (n < 0 || n > 20) throw std::invalid_argument("binomial: n must lie in [0, 20]");
    if (k < 0 || k > n) return 0;
    std::int64_t c = 1;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return c;
}

std::int64_t moment_weight_sum(int n, int i) {
    std::int64_t s = 0;
    for (int j = i + 1; j <= n; ++j) s += binomial(n, j) * (((n - j) % 2 == 0) ? 1 : -1);
    return s;
}

std::int64_t moment_weight_sum_complement(int n, int i) {
    std::int64_t s = 0;
    for (int j = 0; j <= i; ++j) s += binomial(n, j) * (((n - j) % 2 == 0) ? 1 : -1);
    return -s;
}

std::string power_log_label(int k) { return k == 1 ? std::string("X") : "X" + std::to_string(k); }
std::string put_label(double strike) { return "P@" + format_strike(strike); }
std::string call_label(double strike) { return "C@" + format_strike(strike); }

std::vector<double> moment_weights(int n, double X0) {
    if (n < 2) throw std::invalid_argument("moment_payoff: n must be at least 2");
    if (n > 20) throw std::invalid_argument("moment_payoff: n above 20 overflows the binomial weights");
    std::vector<double> w(static_cast<std::size_t>(n - 1));
    for (int i = 1; i <= n - 1; ++i)
        w[static_cast<std::size_t>(i - 1)] =
            std::pow(X0, n - 1 - i) * static_cast<double>(moment_weight_sum(n, i));
    return w;
}

DiPayoff moment_payoff(int n, double X0) {
    if (!std::isfinite(X0)) throw std::invalid_argument("moment_payoff: X0 must be finite");
    const auto w = moment_weights(n, X0);
    const Eigen::Index d = n - 1;
    Matrix omega = Matrix::Zero(d, d);
    omega(0, 0) = w[0];
    for (Eigen::Index j = 1; j < d; ++j) {
        omega(0, j) = 0.5 * w[static_cast<std::size_t>(j)];
        omega(j, 0) = 0.5 * w[static_cast<std::size_t>(j)];
    }
    std::vector<std::string> labels;
    for (int k = 1; k <= n - 1; ++k) labels.push_back(power_log_label(k));
    return DiPayoff(std::move(labels), Vector::Zero(d), omega, Vector::Zero(d), Vector::Zero(d));
}

DiPayoff straddle_payoff(const Matrix& omega_tilde, const std::vector<double>& strikes) {
    const auto d = static_cast<Eigen::Index>(strikes.size());
    if (d < 1) throw std::invalid_argument("straddle_payoff: need at least one strike");
    if (omega_tilde.rows() != d || omega_tilde.cols() != d)
        throw std::invalid_argument("straddle_payoff: omega_tilde must be " + std::to_string(d) + "x" +
                                    std::to_string(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(strikes[static_cast<std::size_t>(i)] > 0.0))
            throw std::invalid_argument("straddle_payoff: strikes must be positive");
        if (i > 0 && !(strikes[static_cast<std::size_t>(i)] > strikes[static_cast<std::size_t>(i - 1)]))
            throw std::invalid_argument("straddle_payoff: strikes must be strictly ascending");
        for (Eigen::Index j = i + 1; j < d; ++j)
            if (omega_tilde(i, j) != 0.0)
                throw std::invalid_argument("straddle_payoff: omega_tilde must be lower triangular");
    }
    Matrix omega = Matrix::Zero(2 * d, 2 * d);
    omega.topRightCorner(d, d) = 0.5 * omega_tilde;
    omega.bottomLeftCorner(d, d) = 0.5 * omega_tilde.transpose();
    std::vector<std::string> labels;
    for (double k : strikes) labels.push_back(put_label(k));
    for (double k : strikes) labels.push_back(call_label(k));
    return DiPayoff(std::move(labels), Vector::Zero(2 * d), omega, Vector::Zero(2 * d), Vector::Zero(2 * d));
}

std::string to_string(ClassicKind kind) {
    switch (kind) {
    case ClassicKind::SquaredLogReturn: return "SquaredLogReturn";
    case ClassicKind::LogVariance: return "LogVariance";
    case ClassicKind::EntropyVariance: return "EntropyVariance";
    case ClassicKind::Tau: return "Tau";
    case ClassicKind::NeubergerPsi: return "NeubergerPsi";
    }
    return "unknown";
}

ClassicKind classic_kind_from_string(const std::string& name) {
    for (auto k : {ClassicKind::SquaredLogReturn, ClassicKind::LogVariance, ClassicKind::EntropyVariance,
                   ClassicKind::Tau, ClassicKind::NeubergerPsi})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown classic pay-off '" + name + "'");
}

double classic_eval(ClassicKind kind, double x, std::optional<double> v_hat) {
    if (kind == ClassicKind::NeubergerPsi) {
        if (!v_hat) throw std::invalid_argument("classic_eval: NeubergerPsi needs a variance increment");
        return 3.0 * (*v_hat) * std::expm1(x) + classic_eval(ClassicKind::Tau, x);
    }
    if (v_hat) throw std::invalid_argument("classic_eval: only NeubergerPsi takes a variance increment");
    // Near zero the closed forms cancel; sum scale * sum_k c_k x^k / k! instead.
    const auto series = [x](double scale, int first, auto c) {
        double term = 1.0, sum = 0.0;
        for (int k = 1; k <= 40; ++k) {
            term *= x / k;
            if (k >= first) sum += c(k) * term;
            if (k > first && std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return scale * sum;
    };
    const bool small = std::abs(x) < 0.5;
    switch (kind) {
    case ClassicKind::SquaredLogReturn: return x * x;
    case ClassicKind::LogVariance:
        return small ? series(2.0, 2, [](int) { return 1.0; }) : 2.0 * (std::expm1(x) - x);
    case ClassicKind::EntropyVariance:
        return small ? series(2.0, 2, [](int k) { return k - 1.0; }) : 2.0 * (x * std::exp(x) - std::expm1(x));
    case ClassicKind::Tau:
        return small ? series(6.0, 3, [](int k) { return k - 2.0; }) : 6.0 * (x * std::exp(x) - 2.0 * std::expm1(x) + x);
    default: break;
    }
    throw std::invalid_argument("classic_eval: unsupported kind");
}

ClassicShifts classic_derivative_shifts(ClassicKind kind, double x) {
    switch (kind) {
    case ClassicKind::SquaredLogReturn: return {2.0 * x, 0.0};
    case ClassicKind::LogVariance: return {2.0 * std::expm1(x), 2.0 * std::expm1(x)};
    case ClassicKind::EntropyVariance: return {2.0 * x * std::exp(x), 2.0 * (std::expm1(x) + x * std::exp(x))};
    case ClassicKind::Tau: return {6.0 * (x * std::exp(x) - std::expm1(x)), 6.0 * x * std::exp(x)};
    case ClassicKind::NeubergerPsi: break;
    }
    throw std::invalid_argument("classic_derivative_shifts: NeubergerPsi is not a function of x_hat alone");
}

} // namespace diswap
