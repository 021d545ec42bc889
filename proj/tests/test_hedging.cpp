#include "diswap/hedging.hpp"
#include "diswap/model_pricer.hpp"
#include "diswap/swaps.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace diswap;

namespace {

ModelSpec merton() {
    ModelSpec m;
    m.kind = ModelKind::MertonJump;
    m.jump = JumpParams{1.0, -0.1, 0.15};
    return m;
}

// Analytic snapshots along one simulated path.
std::vector<MarketState> path_states(const ModelSpec& model, const Partition& part, const std::vector<std::string>& labels,
                                     std::uint64_t seed, std::uint64_t path = 0) {
    const ModelPricer pricer(model, part.maturity(), labels);
    const PathSampler sampler(model, part, seed);
    PathSampler::Path p;
    sampler.sample(path, p);
    std::vector<MarketState> out;
    for (std::size_t i = 0; i < part.times.size(); ++i)
        out.push_back(pricer.state(part.times[i], p.F[i], p.v.empty() ? ModelPricer::kNoVariance : p.v[i]));
    return out;
}

DiPayoff random_payoff(std::mt19937_64& rng, const std::vector<std::string>& labels, bool logs) {
    std::normal_distribution<double> n;
    const auto d = static_cast<Eigen::Index>(labels.size());
    Vector a(d), b = Vector::Zero(d), g = Vector::Zero(d);
    Matrix o(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        a[i] = n(rng);
        for (Eigen::Index j = 0; j < d; ++j) o(i, j) = n(rng) * 1e-3;
    }
    if (logs) {
        b[0] = n(rng);
        g[0] = n(rng);
    }
    return DiPayoff(labels, a, o, b, g);
}

} // namespace

TEST(ValueIncrement, ZeroMoveIsZero) {
    const auto states = path_states(ModelSpec{}, regular_partition(4, 1.0), {"F", "X"}, 1);
    EXPECT_EQ(value_increment(log_variance_payoff(), states[1], states[1]), 0.0);
    const auto d = decompose(log_variance_payoff(), states[2], states[2]);
    EXPECT_EQ(d.realised, 0.0);
    EXPECT_EQ(d.implied, 0.0);
}

TEST(ValueIncrement, LogVarianceClosedForm) {
    const auto states = path_states(ModelSpec{}, regular_partition(12, 1.0), {"F", "X"}, 2);
    for (std::size_t i = 1; i < states.size(); ++i) {
        const double x_hat = states[i].x[0] - states[i - 1].x[0];
        const double X_hat = states[i].X[0] - states[i - 1].X[0];
        EXPECT_NEAR(value_increment(log_variance_payoff(), states[i - 1], states[i]),
                    2 * (std::expm1(x_hat) - X_hat), 1e-13);
    }
}

TEST(ValueIncrement, TelescopesToRealisedLeg) {
    const auto part = regular_partition(252, 1.0);
    const auto payoff = combine(1.0, log_variance_payoff(), 1.0,
                                DiPayoff({"F", "X"}, Vector::Ones(2), Matrix::Identity(2, 2) * 1e-3, Vector::Zero(2),
                                         Vector::Zero(2)));
    const auto states = path_states(ModelSpec{}, part, {"F", "X"}, 3);
    const double v0 = fair_value(payoff, states[0]).value;
    double sum_v = 0, sum_phi = 0;
    for (std::size_t i = 1; i < states.size(); ++i) {
        sum_v += value_increment(payoff, states[i - 1], states[i]);
        sum_phi += payoff.evaluate(state_increment(states[i - 1], states[i]));
    }
    EXPECT_NEAR(sum_v + v0, sum_phi, 1e-10);
}

TEST(Decompose, FinalImpliedIsMinusLastRate) {
    const auto states = path_states(ModelSpec{}, regular_partition(12, 1.0), {"F", "X"}, 4);
    const auto n = states.size();
    const double v_prev = fair_value(log_variance_payoff(), states[n - 2]).value;
    EXPECT_NEAR(decompose(log_variance_payoff(), states[n - 2], states[n - 1]).implied, -v_prev, 1e-15);
}

TEST(Decompose, ImpliedLegsRecomputeFromSigma) {
    // Quadratic-only swap on F: v_t = Sigma_t - F_t^2, so sum of implied = -v0 + sum_t [Sigma_hat - 2 F_{t-1} F_hat - F_hat^2].
    const DiPayoff var({"F"}, Vector::Zero(1), Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1));
    const auto states = path_states(ModelSpec{}, regular_partition(52, 1.0), {"F"}, 5);
    double implied = 0, direct = 0;
    for (std::size_t i = 1; i < states.size(); ++i) {
        implied += decompose(var, states[i - 1], states[i]).implied;
        const double Fh = states[i].F[0] - states[i - 1].F[0];
        direct += (states[i].Sigma(0, 0) - states[i - 1].Sigma(0, 0)) - 2 * states[i - 1].F[0] * Fh - Fh * Fh;
    }
    EXPECT_NEAR(implied, direct, 1e-8);
    EXPECT_NEAR(implied, -(states[0].Sigma(0, 0) - 1e4), 1e-8);
}

TEST(DecomposeProperty, RealisedPlusImpliedIsTotal) {
    std::mt19937_64 rng(6);
    const std::vector<std::string> labels{"F", "X", "X2", "P@95", "C@105"};
    for (const auto& model : {ModelSpec{}, merton()}) {
        const auto states = path_states(model, irregular_partition(30, 1.0, 9), labels, 7);
        for (int trial = 0; trial < 5; ++trial) {
            const auto p = random_payoff(rng, labels, true);
            for (std::size_t i = 1; i < states.size(); ++i) {
                const auto d = decompose(p, states[i - 1], states[i]);
                const double total = value_increment(p, states[i - 1], states[i]);
                EXPECT_NEAR(d.realised + d.implied, total, 1e-12 * std::max(1.0, std::abs(total)));
            }
        }
    }
}

TEST(HedgeProperty, HoldingsReproduceValueIncrement) {
    std::mt19937_64 rng(7);
    const std::vector<std::string> labels{"F", "X", "X2", "P@95", "C@105"};
    for (const auto& model : {ModelSpec{}, merton()}) {
        const auto states = path_states(model, regular_partition(52, 1.0), labels, 8);
        for (int trial = 0; trial < 5; ++trial) {
            const auto p = random_payoff(rng, labels, true);
            for (std::size_t i = 1; i < states.size(); ++i) {
                const auto h = hedge_holdings(p, states[i - 1]);
                EXPECT_NEAR(hedge_increment(h, states[i - 1], states[i]), value_increment(p, states[i - 1], states[i]),
                            1e-10);
            }
        }
    }
}

TEST(MomentHedge, TableRatios) {
    const auto h2 = moment_hedge_ratios(2, 0.1, {0.3});
    EXPECT_EQ(h2.h, std::vector<double>{0.6});
    EXPECT_DOUBLE_EQ(h2.increment({0.5, 2.0}), 2.0 - 0.6 * 0.5);
    const auto h3 = moment_hedge_ratios(3, 0.0, {0.3, 0.7});
    EXPECT_EQ(h3.h, (std::vector<double>{0.7, 0.3}));
    const double X0 = -0.2, X = -0.15, X2 = 0.05, X3 = -0.01;
    const auto h4 = moment_hedge_ratios(4, X0, {X, X2, X3});
    EXPECT_NEAR(h4.h[0], X3 - 3 * X0 * X2 + 6 * X0 * X0 * X, 1e-16);
    EXPECT_NEAR(h4.h[1], -3 * X0 * X0 - 3 * X0 * X, 1e-16);
    EXPECT_NEAR(h4.h[2], 3 * X0 + X, 1e-16);
    EXPECT_THROW(moment_hedge_ratios(5, 0.0, {0, 0, 0, 0}), std::invalid_argument);
}

TEST(MomentHedgeProperty, MatchesValueIncrementAlongPaths) {
    const std::vector<std::string> all{"X", "X2", "X3", "X4"};
    const auto part = regular_partition(52, 1.0);
    for (const auto& model : {ModelSpec{}, merton()}) {
        const ModelPricer pricer(model, 1.0, all);
        const double X0 = pricer.values(0.0, model.F0)[0];
        const PathSampler sampler(model, part, 11);
        PathSampler::Path path;
        sampler.sample(3, path);
        for (int n = 2; n <= 4; ++n) {
            const std::vector<std::string> labels(all.begin(), all.begin() + (n - 1));
            const ModelPricer sub(model, 1.0, labels);
            const auto payoff = moment_payoff(n, X0);
            for (std::size_t i = 1; i < part.times.size(); ++i) {
                const auto prev = sub.state(part.times[i - 1], path.F[i - 1]);
                const auto curr = sub.state(part.times[i], path.F[i]);
                const auto vp = pricer.values(part.times[i - 1], path.F[i - 1]);
                const auto vc = pricer.values(part.times[i], path.F[i]);
                std::vector<double> prev_powers(vp.data(), vp.data() + 3), dX(4);
                for (int k = 0; k < 4; ++k) dX[static_cast<std::size_t>(k)] = vc[k] - vp[k];
                const auto hedge = moment_hedge_ratios(n, X0, prev_powers);
                EXPECT_NEAR(hedge.increment(dX), value_increment(payoff, prev, curr), 1e-10) << n << " " << i;
            }
        }
    }
}

TEST(StraddleHedge, Examples) {
    EXPECT_EQ(straddle_hedge_increment(5, 7, 0, 0), 0.0);
    EXPECT_EQ(straddle_hedge_increment(5, 7, -1, 2), -3.0);
}

TEST(StraddleHedge, TelescopesOverOptionPath) {
    const auto part = regular_partition(252, 1.0);
    const auto payoff = straddle_payoff(Matrix::Ones(1, 1), {100.0});
    const auto states = path_states(ModelSpec{}, part, payoff.labels(), 12);
    const double rate = straddle_rate(states[0].F.head(1), states[0].F.tail(1), Matrix::Ones(1, 1));
    double total = 0, realised = 0;
    for (std::size_t i = 1; i < states.size(); ++i) {
        const double P0 = states[i - 1].F[0], C0 = states[i - 1].F[1];
        const double Ph = states[i].F[0] - P0, Ch = states[i].F[1] - C0;
        total += straddle_hedge_increment(P0, C0, Ph, Ch);
        realised += Ph * Ch;
        EXPECT_NEAR(straddle_hedge_increment(P0, C0, Ph, Ch), value_increment(payoff, states[i - 1], states[i]), 1e-10);
    }
    EXPECT_NEAR(total, realised - rate, 1e-10);
}

TEST(FrequencyMtm, Examples) {
    const auto pm = regular_partition(252, 1.0);
    const auto ph = regular_partition(12, 1.0);
    const PathSampler sampler(ModelSpec{}, pm, 13);
    PathSampler::Path path;
    sampler.sample(0, path);
    std::vector<Vector> values;
    for (double f : path.F) values.push_back(Vector::Constant(1, f));
    const DiPayoff lin({"F"}, Vector::Constant(1, 2.5), Matrix::Zero(1, 1), Vector::Zero(1), Vector::Zero(1));
    const DiPayoff quad({"F"}, Vector::Zero(1), Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1));
    EXPECT_EQ(frequency_mtm(quad, values, pm, ph, 0.0), 0.0);
    for (double t : ph.times) EXPECT_NEAR(frequency_mtm(lin, values, pm, ph, t), 0.0, 1e-12);
    EXPECT_NE(frequency_mtm(quad, values, pm, ph, 1.0), 0.0);
    std::vector<Vector> coarse_values;
    for (std::size_t i = 0; i < pm.times.size(); i += 21) coarse_values.push_back(values[i]);
    for (double t : ph.times) EXPECT_EQ(frequency_mtm(quad, coarse_values, ph, ph, t), 0.0);
    EXPECT_THROW(frequency_mtm(quad, values, pm, ph, 0.5 / 252), std::invalid_argument);
    EXPECT_THROW(frequency_mtm(quad, values, ph, pm, 0.0), std::invalid_argument);
}

TEST(ConstantMaturity, InterpolatesIncrements) {
    const auto part = regular_partition(4, 0.25);
    const std::vector<double> near{1, 1, 1, 1}, far{3, 3, 3, 3};
    // tau = 1 between T=1 and T=1.25: weight on the near swap runs 1, 0.75, 0.5, 0.25.
    const auto cm = constant_maturity_increments(part, near, 1.0, far, 1.25, 1.0);
    ASSERT_EQ(cm.size(), 4u);
    EXPECT_NEAR(cm[0], 1.0, 1e-12);
    EXPECT_NEAR(cm[1], 1.5, 1e-12);
    EXPECT_NEAR(cm[3], 2.5, 1e-12);
    const auto same = constant_maturity_increments(part, near, 1.0, near, 1.25, 1.0);
    for (double v : same) EXPECT_EQ(v, 1.0);
    EXPECT_THROW(constant_maturity_increments(part, near, 1.0, far, 1.25, 0.5), std::invalid_argument);
    EXPECT_THROW(constant_maturity_increments(part, {1.0}, 1.0, far, 1.25, 1.0), std::invalid_argument);
}

TEST(HedgeSimulation, ExactReplicationAndReport) {
    const auto part = regular_partition(52, 1.0);
    const auto r = hedge_simulation(log_variance_payoff(), ModelSpec{}, part, 300, 14);
    EXPECT_NEAR(r.v0, 0.04, 1e-12);
    EXPECT_LT(r.max_step_error, 1e-10);
    EXPECT_LT(r.max_terminal_error, 1e-10);
    EXPECT_EQ(r.value_path.front(), 0.0);
    ASSERT_EQ(r.realised.size(), part.times.size());
    for (double res : r.residual) EXPECT_LT(res, 1e-10);
    EXPECT_EQ(r.hedge_positions.size(), part.steps());
}

TEST(HedgeSimulationProperty, ValueIncrementsAreMartingaleDifferences) {
    const auto part = regular_partition(12, 1.0);
    for (const auto& model : {ModelSpec{}, merton()}) {
        const auto r = hedge_simulation(moment_payoff(2, std::log(100.0) - 0.02), model, part, 20000, 15);
        for (std::size_t i = 1; i < part.times.size(); ++i)
            EXPECT_LT(std::abs(r.increment_mean[i]), 4 * r.increment_se[i]) << model.label() << " " << i;
    }
}

TEST(HedgeSimulationProperty, IndependentOfThreadCount) {
    const auto part = regular_partition(12, 1.0);
    const auto a = hedge_simulation(log_variance_payoff(), merton(), part, 700, 16, 1);
    const auto b = hedge_simulation(log_variance_payoff(), merton(), part, 700, 16, 3);
    EXPECT_EQ(a.value_path, b.value_path);
    EXPECT_EQ(a.implied, b.implied);
    EXPECT_EQ(a.terminal_sd, b.terminal_sd);
}
