#include "diswap/claims.hpp"
#include "diswap/model_pricer.hpp"
#include "diswap/replication.hpp"
#include "diswap/swaps.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace diswap;

namespace {

OptionChain black76_state_chain(double T = 1.0) {
    return black76_chain(100.0, 0.2, T, default_grid(100.0, 0.2, T, 4096, 10).strikes());
}

std::vector<double> chain_powers(const OptionChain& chain, int up_to) {
    std::vector<double> X;
    for (int n = 1; n <= up_to; ++n) X.push_back(power_log_price(chain, n, std::log(chain.F)));
    return X;
}

DiPayoff random_payoff(std::mt19937_64& rng, const std::vector<std::string>& labels) {
    std::normal_distribution<double> n;
    const auto d = static_cast<Eigen::Index>(labels.size());
    Vector a(d), b(d), g(d);
    Matrix o(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        a[i] = n(rng);
        // Log terms only on the forward, the one label every state prices a log contract for.
        const bool logs = labels[static_cast<std::size_t>(i)] == "F";
        b[i] = logs ? n(rng) : 0.0;
        g[i] = logs ? n(rng) : 0.0;
        for (Eigen::Index j = 0; j < d; ++j) o(i, j) = n(rng);
    }
    return DiPayoff(labels, a, o, b, g);
}

ModelSpec merton() {
    ModelSpec m;
    m.kind = ModelKind::MertonJump;
    m.jump = JumpParams{1.0, -0.1, 0.15};
    return m;
}

} // namespace

TEST(MarketState, ValidatesAndSymmetrises) {
    Matrix S(2, 2);
    S << 10100, 5, 5.0 + 1e-13, 1;
    Vector F0(2);
    F0 << 100.0, 0.0;
    const MarketState st({"F", "X"}, F0, S, Vector::Zero(2));
    EXPECT_EQ(st.Sigma(0, 1), st.Sigma(1, 0));
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = 0.5;  // Sigma - F F' has a negative eigenvalue
    EXPECT_THROW(MarketState({"F", "X"}, Vector::Ones(2), bad, Vector::Zero(2)), std::invalid_argument);
    EXPECT_THROW(MarketState({"F"}, Vector::Ones(2), Matrix::Identity(2, 2), Vector::Zero(2)), std::invalid_argument);
}

TEST(MarketState, TerminalState) {
    Vector F(2);
    F << 2.0, 3.0;
    const auto st = MarketState::terminal({"F", "C@1"}, F);
    EXPECT_TRUE(st.Sigma.isApprox(F * F.transpose(), 0.0));
    EXPECT_EQ(st.X[0], std::log(2.0));
}

TEST(FairValue, AlphaOnlyIsZero) {
    const auto chain = black76_state_chain();
    const auto st = chain_state(chain, {"F", "X"});
    const DiPayoff p({"F", "X"}, Vector::Ones(2), Matrix::Zero(2, 2), Vector::Zero(2), Vector::Zero(2));
    EXPECT_EQ(fair_value(p, st).value, 0.0);
}

TEST(FairValue, ScalarQuadratic) {
    const MarketState st({"F"}, Vector::Constant(1, 100.0), Matrix::Constant(1, 1, 10100.0), Vector::Zero(1));
    const DiPayoff p({"F"}, Vector::Zero(1), Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1));
    const auto fv = fair_value(p, st);
    EXPECT_EQ(fv.value, 100.0);
    EXPECT_EQ(fv.quadratic_term, 100.0);
    EXPECT_EQ(fv.log_term, 0.0);
}

TEST(FairValue, LogVarianceFromChain) {
    const auto st = chain_state(black76_state_chain(), {"F", "X"});
    EXPECT_NEAR(fair_value(log_variance_payoff(), st).value, 0.04, 1e-6);
}

TEST(FairValue, Errors) {
    const auto st = chain_state(black76_state_chain(), {"F", "X"});
    EXPECT_THROW(fair_value(DiPayoff::zero({"F", "X2"}), st), std::invalid_argument);
    EXPECT_THROW(fair_value(DiPayoff::zero({"F"}), st), std::invalid_argument);
    // Straddle over strikes whose product is unknown from quotes alone.
    Matrix w(2, 2);
    w << 1, 0, 1, 1;
    const auto p = straddle_payoff(w, {90, 110});
    const auto chain = black76_chain(100, 0.2, 1, {80, 90, 100, 110, 120});
    EXPECT_THROW(fair_value(p, chain_state(chain, p.labels())), std::invalid_argument);
}

TEST(FairValueProperty, LinearInCoefficientsAndBlindToAlphaBeta) {
    std::mt19937_64 rng(8);
    const std::vector<std::string> labels{"F", "X", "P@100", "C@100"};
    const ModelPricer pricer(ModelSpec{}, 1.0, labels);
    const auto st = pricer.state(0.25, 103.0);
    for (int i = 0; i < 30; ++i) {
        const auto p1 = random_payoff(rng, labels);
        const auto p2 = random_payoff(rng, labels);
        const double a = 0.7, b = -1.3;
        const double lhs = fair_value(combine(a, p1, b, p2), st).value;
        const double rhs = a * fair_value(p1, st).value + b * fair_value(p2, st).value;
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
        const DiPayoff shifted(labels, p1.alpha() * 3.0 + Vector::Ones(4), p1.omega(), -p1.beta(), p1.gamma());
        EXPECT_EQ(fair_value(shifted, st).value, fair_value(p1, st).value);
    }
}

TEST(MomentRate, BlackScholesOracles) {
    const auto X = chain_powers(black76_state_chain(), 4);
    EXPECT_NEAR(moment_rate(2, X), 0.04, 1e-6);
    EXPECT_NEAR(moment_rate(3, X), 0.0, 1e-6);
    EXPECT_NEAR(moment_rate(4, X), 4.8e-3, 2e-6);
    EXPECT_THROW(moment_rate(3, {0.1}), std::invalid_argument);
    EXPECT_THROW(moment_rate(1, X), std::invalid_argument);
}

TEST(MomentRateProperty, AgreesWithFairValueOnPowerLogState) {
    const double mu = -0.3, v = 0.2;
    std::vector<double> X;
    for (int k = 1; k <= 8; ++k) X.push_back(normal_raw_moment(k, mu, v));
    for (int n = 2; n <= 5; ++n) {
        const auto st = moment_state(n, X);
        const double via_state = fair_value(moment_payoff(n, X[0]), st).value;
        EXPECT_NEAR(via_state, moment_rate(n, X), 1e-12 * std::max(1.0, std::abs(via_state))) << n;
    }
    EXPECT_THROW(moment_state(4, {0.1, 0.2, 0.3, 0.4, 0.5}), std::invalid_argument);
}

TEST(StraddleRate, Examples) {
    EXPECT_EQ(straddle_rate(Vector::Constant(1, 5.0), Vector::Constant(1, 7.0), Matrix::Ones(1, 1)), -35.0);
    EXPECT_EQ(straddle_rate(Vector::Ones(3), Vector::Ones(3), Matrix::Zero(3, 3)), 0.0);
    const double P = black76_put(100, 100, 0.2, 1), C = black76_call(100, 100, 0.2, 1);
    EXPECT_NEAR(straddle_rate(Vector::Constant(1, P), Vector::Constant(1, C), Matrix::Ones(1, 1)), -63.45026, 1e-4);
    EXPECT_THROW(straddle_rate(Vector::Ones(2), Vector::Ones(3), Matrix::Ones(2, 2)), std::invalid_argument);
}

TEST(StraddleRate, MatchesFairValueForDiagonalWeights) {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = 1.0;
    w(1, 1) = 0.5;
    const auto p = straddle_payoff(w, {95.0, 105.0});
    const auto chain = black76_chain(100, 0.2, 1, {80, 95, 100, 105, 120});
    const auto st = chain_state(chain, p.labels());
    EXPECT_NEAR(fair_value(p, st).value, straddle_rate(st.F.head(2), st.F.tail(2), w), 1e-12);
}

TEST(CalendarAndFrequency, Rates) {
    EXPECT_EQ(frequency_rate(), 0.0);
    EXPECT_EQ(calendar_rate(0.3, 0.3), 0.0);
    const double v_long = fair_value(log_variance_payoff(), chain_state(black76_state_chain(0.5), {"F", "X"})).value;
    const double v_short = fair_value(log_variance_payoff(), chain_state(black76_state_chain(0.25), {"F", "X"})).value;
    EXPECT_NEAR(calendar_rate(v_long, v_short), 0.01, 1e-6);
}

TEST(ModelPricer, GbmValuesMatchClosedForms) {
    const ModelPricer pricer(ModelSpec{}, 1.0, {"F", "X", "X2", "P@100", "C@110"});
    const auto v = pricer.values(0.5, 105.0);
    const double tau = 0.5, s = 0.2, mu = std::log(105.0) - 0.5 * s * s * tau;
    EXPECT_EQ(v[0], 105.0);
    EXPECT_NEAR(v[1], mu, 1e-14);
    EXPECT_NEAR(v[2], mu * mu + s * s * tau, 1e-13);
    EXPECT_NEAR(v[3], black76_put(105, 100, s, tau), 1e-11);
    EXPECT_NEAR(v[4], black76_call(105, 110, s, tau), 1e-11);
    const auto at_T = pricer.values(1.0, 90.0);
    EXPECT_NEAR(at_T[3], 10.0, 1e-12);
    EXPECT_NEAR(at_T[4], 0.0, 1e-12);
}

TEST(ModelPricer, MertonMixtureMatchesJumpOracles) {
    // E[ln F_T] = ln F - (sigma^2/2 + lambda kbar) tau + lambda m tau.
    const auto m = merton();
    const ModelPricer pricer(m, 1.0, {"F", "X"});
    const auto st = pricer.state(0.0, 100.0);
    const double kbar = m.jump_compensator();
    EXPECT_NEAR(st.F[1], std::log(100.0) - (0.02 + kbar) - 0.1, 1e-12);
    // Second moment of F_T: F^2 exp(sigma^2 tau + lambda tau E[(e^J - 1)^2]).
    const double ej2 = std::exp(2 * -0.1 + 2 * 0.15 * 0.15);
    const double ej = std::exp(-0.1 + 0.5 * 0.15 * 0.15);
    EXPECT_NEAR(st.Sigma(0, 0), 1e4 * std::exp(0.04 + (ej2 - 2 * ej + 1)), 1e-8);
    double w = 0;
    for (const auto& c : conditional_law(m, 100.0, 1.0)) w += c.weight;
    EXPECT_NEAR(w, 1.0, 1e-14);
}

TEST(ModelPricer, HestonLogExpectation) {
    ModelSpec h;
    h.kind = ModelKind::Heston;
    h.heston = HestonParams{2.0, 0.05, 0.4, -0.5, 0.03};
    const ModelPricer pricer(h, 1.0, {"F", "X"});
    const double tau = 0.75, kappa = 2.0, theta = 0.05, v = 0.03;
    const double expected =
        std::log(90.0) - 0.5 * (theta * tau + (v - theta) * (1 - std::exp(-kappa * tau)) / kappa);
    EXPECT_NEAR(pricer.values(0.25, 90.0, v)[1], expected, 1e-14);
    EXPECT_THROW(ModelPricer(h, 1.0, {"X2"}), std::invalid_argument);
}

TEST(ModelPricerProperty, StateIsPsdAndTerminalAtMaturity) {
    const std::vector<std::string> labels{"F", "X", "X2", "P@90", "C@90", "C@120"};
    for (const auto& model : {ModelSpec{}, merton()}) {
        const ModelPricer pricer(model, 1.0, labels);
        for (double t : {0.0, 0.3, 0.99}) {
            const auto st = pricer.state(t, 97.0);
            const Eigen::SelfAdjointEigenSolver<Matrix> es(st.Sigma - st.F * st.F.transpose());
            EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8 * st.Sigma.cwiseAbs().maxCoeff());
        }
        const auto end = pricer.state(1.0, 97.0);
        EXPECT_TRUE(end.Sigma.isApprox(end.F * end.F.transpose(), 1e-15));
    }
}
