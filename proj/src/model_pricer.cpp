#include "diswap/model_pricer.hpp"

#include <cmath>
#include <stdexcept>

namespace diswap {

namespace {

constexpr int kForward = 0;
constexpr int kLog = 1;
constexpr int kOther = 2;

} // namespace

std::vector<LogNormalComponent> conditional_law(const ModelSpec& model, double F_t, double tau) {
    if (model.kind == ModelKind::Heston)
        throw std::invalid_argument("conditional_law: Heston has no Gaussian mixture law");
    if (!(F_t > 0.0)) throw std::invalid_argument("conditional_law: forward must be positive");
    if (tau < 0.0) throw std::invalid_argument("conditional_law: negative time to maturity");
    const double sigma2 = model.vol * model.vol;
    const double lambda = model.jump_intensity();
    const double base = std::log(F_t) - 0.5 * sigma2 * tau - lambda * model.jump_compensator() * tau;
    if (lambda == 0.0 || tau == 0.0) return {{1.0, base, sigma2 * tau}};

    const double m = model.jump->mean_log_jump;
    const double s2 = model.jump->sd_log_jump * model.jump->sd_log_jump;
    const double mu = lambda * tau;
    std::vector<LogNormalComponent> law;
    double pmf = std::exp(-mu);
    double mass = 0.0;
    for (int n = 0; n < 400; ++n) {
        if (n > 0) pmf *= mu / n;
        law.push_back({pmf, base + n * m, sigma2 * tau + n * s2});
        mass += pmf;
        if (n > mu && 1.0 - mass < 1e-15) break;
    }
    return law;
}

ModelPricer::ModelPricer(ModelSpec model, double T, std::vector<std::string> labels)
    : model_(model.risk_neutral()), T_(T), labels_(std::move(labels)) {
    model_.validate();
    if (!(T_ > 0.0)) throw std::invalid_argument("ModelPricer: maturity must be positive");
    if (labels_.empty()) throw std::invalid_argument("ModelPricer: no instruments");
    for (const auto& label : labels_) {
        claims_.push_back(TerminalClaim::from_label(label));
        kind_.push_back(label == "F" ? kForward : label == "X" ? kLog : kOther);
        if (model_.kind == ModelKind::Heston && kind_.back() == kOther)
            throw std::invalid_argument("ModelPricer: Heston supports only the F and X instruments, not '" + label + "'");
    }
    if (model_.kind != ModelKind::Heston) {
        for (std::size_t a = 0; a < claims_.size(); ++a)
            for (std::size_t b = a; b < claims_.size(); ++b) products_.push_back(claims_[a] * claims_[b]);
    }
}

double ModelPricer::expectation(const TerminalClaim& claim, const std::vector<LogNormalComponent>& law) const {
    double total = 0.0;
    for (const auto& c : law) total += c.weight * gaussian_expectation(claim, c.mean, c.var);
    return total;
}

double ModelPricer::expected_log(double t, double F_t, double v_t) const {
    const double tau = T_ - t;
    if (model_.kind == ModelKind::Heston) {
        const auto& h = *model_.heston;
        const double v = std::isnan(v_t) ? h.v0 : std::max(v_t, 0.0);
        const double integrated = h.theta * tau + (v - h.theta) * (-std::expm1(-h.kappa * tau)) / h.kappa;
        return std::log(F_t) - 0.5 * integrated;
    }
    const double sigma2 = model_.vol * model_.vol;
    const double lambda = model_.jump_intensity();
    double mean = std::log(F_t) - 0.5 * sigma2 * tau - lambda * model_.jump_compensator() * tau;
    if (lambda > 0.0) mean += lambda * tau * model_.jump->mean_log_jump;
    return mean;
}

void ModelPricer::values(double t, double F_t, double v_t, double* out) const {
    if (!(F_t > 0.0)) throw std::invalid_argument("ModelPricer: forward must be positive");
    const std::size_t d = labels_.size();
    if (at_maturity(t)) {
        const double y = std::log(F_t);
        for (std::size_t j = 0; j < d; ++j) out[j] = kind_[j] == kForward ? F_t : claims_[j].evaluate(y);
        return;
    }
    if (model_.kind == ModelKind::Heston) {
        for (std::size_t j = 0; j < d; ++j) out[j] = kind_[j] == kForward ? F_t : expected_log(t, F_t, v_t);
        return;
    }
    const auto law = conditional_law(model_, F_t, T_ - t);
    for (std::size_t j = 0; j < d; ++j) out[j] = kind_[j] == kForward ? F_t : expectation(claims_[j], law);
}

Vector ModelPricer::values(double t, double F_t, double v_t) const {
    Vector out(static_cast<Eigen::Index>(labels_.size()));
    values(t, F_t, v_t, out.data());
    return out;
}

MarketState ModelPricer::state(double t, double F_t, double v_t) const {
    const Vector F = values(t, F_t, v_t);
    if (at_maturity(t)) return MarketState::terminal(labels_, F);
    const auto d = F.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Matrix Sigma = Matrix::Constant(d, d, nan);
    Vector X = Vector::Constant(d, nan);
    const double log_mean = expected_log(t, F_t, v_t);
    for (Eigen::Index j = 0; j < d; ++j)
        if (kind_[static_cast<std::size_t>(j)] == kForward) X[j] = log_mean;
    if (model_.kind != ModelKind::Heston) {
        const auto law = conditional_law(model_, F_t, T_ - t);
        std::size_t k = 0;
        for (Eigen::Index a = 0; a < d; ++a) {
            for (Eigen::Index b = a; b < d; ++b, ++k) {
                const double v = expectation(products_[k], law);
                Sigma(a, b) = v;
                Sigma(b, a) = v;
            }
        }
    }
    return MarketState(labels_, F, Sigma, X);
}

} // namespace diswap
