#include "diswap/verify.hpp"

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

const Characteristic kSquared = ClassicPayoff{ClassicKind::SquaredLogReturn};

DiPayoff linear_payoff() {
    return DiPayoff({"F"}, Vector::Constant(1, 0.7), Matrix::Zero(1, 1), Vector::Zero(1), Vector::Zero(1));
}

DiPayoff random_payoff(std::mt19937_64& rng, Eigen::Index d) {
    std::normal_distribution<double> n;
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < d; ++i) labels.push_back("C@" + std::to_string(90 + 5 * i));
    Vector a(d), b(d), g(d);
    Matrix o(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        a[i] = n(rng);
        b[i] = n(rng);
        g[i] = n(rng);
        for (Eigen::Index j = 0; j < d; ++j) o(i, j) = n(rng);
    }
    return DiPayoff(labels, a, o, b, g);
}

} // namespace

TEST(EstimateRate, LogVarianceMatchesSigmaSquaredT) {
    for (int N : {1, 12, 252}) {
        const auto e = estimate_rate(log_variance_payoff(), ModelSpec{}, regular_partition(N, 1.0), 30000, 1);
        EXPECT_LT(std::abs(e.mean - 0.04), 3 * e.se) << N;
        EXPECT_EQ(e.n_paths, 30000u);
    }
}

TEST(EstimateRate, SquaredLogReturnCarriesDiscretisationBias) {
    const int N = 4;
    const auto e = estimate_rate(kSquared, ModelSpec{}, regular_partition(N, 1.0), 100000, 2);
    EXPECT_LT(std::abs(e.mean - (0.04 + 0.0004 / N)), 3 * e.se);
}

TEST(EstimateRate, LinearPayoffIsCentred) {
    for (const auto& model : {ModelSpec{}, merton()}) {
        const auto e = estimate_rate(linear_payoff(), model, regular_partition(12, 1.0), 20000, 3);
        EXPECT_LT(std::abs(e.mean), 3 * e.se);
    }
}

TEST(ApCheck, SecondMomentPassesUnderJumps) {
    const auto model = merton();
    const double X0 = std::log(100.0) - (0.02 + model.jump_compensator()) - 0.1;
    const auto v = ap_check(moment_payoff(2, X0), model,
                            {regular_partition(12, 1.0), regular_partition(52, 1.0), irregular_partition(20, 1.0, 7)},
                            100000, 4);
    EXPECT_TRUE(v.pass) << v.max_abs_z;
    EXPECT_EQ(v.partitions.size(), 3u);
    EXPECT_LE(v.max_abs_z, v.z_threshold);
    EXPECT_LT(v.dual_form_max_error, 1e-12);
    EXPECT_GT(v.dual_form_steps, 0u);
}

TEST(ApCheck, SquaredLogReturnFailsAtHighVolatility) {
    ModelSpec m;
    m.vol = 0.5;
    const auto v = ap_check(kSquared, m, {regular_partition(12, 1.0), regular_partition(252, 1.0)}, 100000, 5);
    EXPECT_FALSE(v.pass);
    EXPECT_GT(v.max_abs_z, 4.0);
    EXPECT_TRUE(std::isnan(v.dual_form_max_error));
}

TEST(ApCheck, TrivialOnlyPartitionScoresZero) {
    const auto v = ap_check(log_variance_payoff(), ModelSpec{}, {regular_partition(1, 1.0)}, 1000, 6);
    EXPECT_EQ(v.partitions[0].z, 0.0);
    EXPECT_TRUE(v.pass);
}

TEST(ApCheck, Errors) {
    EXPECT_THROW(ap_check(log_variance_payoff(), ModelSpec{}, {regular_partition(4, 1.0)}, 1000, 1, 0.0),
                 std::invalid_argument);
    EXPECT_THROW(ap_check(log_variance_payoff(), ModelSpec{}, std::vector<Partition>{}, 1000, 1), std::invalid_argument);
}

TEST(ApCheck, MultiPayoffMatchesSingle) {
    const std::vector<Partition> parts{regular_partition(12, 1.0)};
    const auto both = ap_check({Characteristic{log_variance_payoff()}, kSquared}, ModelSpec{}, parts, 5000, 7);
    const auto single = ap_check(kSquared, ModelSpec{}, parts, 5000, 7);
    ASSERT_EQ(both.size(), 2u);
    EXPECT_EQ(both[1].partitions[0].leg.mean, single.partitions[0].leg.mean);
    EXPECT_EQ(both[1].max_abs_z, single.max_abs_z);
}

TEST(ApCheck, ThreadIndependent) {
    const std::vector<Partition> parts{regular_partition(12, 1.0), irregular_partition(10, 1.0, 3)};
    const std::vector<Characteristic> payoffs{log_variance_payoff(), moment_payoff(3, std::log(100.0))};
    const auto a = ap_check(payoffs, merton(), parts, 20000, 8, 4.0, 1);
    const auto b = ap_check(payoffs, merton(), parts, 20000, 8, 4.0, 3);
    for (std::size_t k = 0; k < payoffs.size(); ++k) {
        EXPECT_EQ(a[k].reference.mean, b[k].reference.mean);
        EXPECT_EQ(a[k].partitions[1].difference.se, b[k].partitions[1].difference.se);
        EXPECT_EQ(a[k].dual_form_max_error, b[k].dual_form_max_error);
    }
}

TEST(PairedZ, ZeroVarianceCases) {
    EXPECT_EQ(paired_z({0.0, 0.0, 10}, 1.0), 0.0);
    EXPECT_EQ(paired_z({1e-15, 0.0, 10}, 1.0), 0.0);
    EXPECT_TRUE(std::isinf(paired_z({1e-3, 0.0, 10}, 1.0)));
    EXPECT_EQ(paired_z({0.2, 0.1, 10}, 1.0), 2.0);
}

TEST(DualFormProperty, MatchesIncrementForm) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_payoff(rng, 3);
        Vector x0(3), x1(3);
        for (int i = 0; i < 3; ++i) {
            x0[i] = std::log(100.0) + 0.3 * n(rng);
            x1[i] = x0[i] + 0.05 * n(rng);
        }
        const double direct =
            p.evaluate(Increment::between(x0.array().exp().matrix(), x1.array().exp().matrix()));
        EXPECT_NEAR(dual_form(p, x0, x1), direct, 1e-12 * std::max(1.0, std::abs(direct)));
    }
}

TEST(DeltaN, LinearIsExactlyZero) {
    const auto r = delta_n(linear_payoff(), ModelSpec{}, regular_partition(4, 1.0), 2000, 16, 10);
    EXPECT_LT(std::abs(r.delta.mean), 1e-12);
    EXPECT_LT(r.delta.se, 1e-12);
}

TEST(DeltaN, LogVarianceIsUnbiased) {
    const auto r = delta_n(log_variance_payoff(), ModelSpec{}, regular_partition(1, 1.0), 50000, 16, 11);
    EXPECT_LT(std::abs(r.delta.mean), 3 * r.delta.se);
}

TEST(DeltaN, SquaredLogReturnMatchesOracle) {
    const auto r = delta_n(kSquared, ModelSpec{}, regular_partition(1, 1.0), 100000, 16, 12);
    const double oracle = 0.04 * 0.04 / 4 * (1 - 1.0 / 16);
    EXPECT_LT(std::abs(r.delta.mean - oracle), 3 * r.delta.se);
    EXPECT_EQ(r.fine_factor, 16);
    EXPECT_THROW(delta_n(kSquared, ModelSpec{}, regular_partition(1, 1.0), 100, 1, 12), std::invalid_argument);
}

TEST(FrequencyEstimate, NestedLegsAgree) {
    const auto lv = frequency_estimate(log_variance_payoff(), ModelSpec{}, regular_partition(252, 1.0),
                                       regular_partition(12, 1.0), 20000, 13);
    EXPECT_LT(std::abs(lv.difference.mean), 3 * lv.difference.se);
    const auto lin = frequency_estimate(linear_payoff(), merton(), regular_partition(252, 1.0),
                                        regular_partition(12, 1.0), 2000, 14);
    EXPECT_LT(lin.max_abs_difference, 1e-10);
    EXPECT_THROW(frequency_estimate(linear_payoff(), ModelSpec{}, regular_partition(12, 1.0),
                                    regular_partition(5, 1.0), 100, 1),
                 std::invalid_argument);
}

TEST(Residual, SquaredLogReturnHandComputation) {
    const ResidualPoint pt{Vector::Constant(1, 0.3), Vector::Constant(1, 0.1), Vector::Constant(1, 2.0)};
    const auto r = pde_residual(ClassicKind::SquaredLogReturn, {pt});
    EXPECT_NEAR(r.residuals[0](0, 0), -0.05, 1e-15);
    const auto pts = random_points(1, 50, 3);
    const auto all = pde_residual(ClassicKind::SquaredLogReturn, pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
        EXPECT_NEAR(all.residuals[i](0, 0), -2 * pts[i].x_hat[0] / (pts[i].F[0] * pts[i].F[0]), 1e-10);
}

TEST(Residual, LogVarianceAsClassicIsZero) {
    const auto r = pde_residual(ClassicKind::LogVariance, random_points(1, 100, 4));
    EXPECT_LT(r.max_norm, 1e-14);
    const auto eta = pde_residual(ClassicKind::EntropyVariance, random_points(1, 20, 4));
    EXPECT_GT(eta.max_norm, 1e-3);
}

TEST(ResidualProperty, DiPayoffsAreExactSolutions) {
    std::mt19937_64 rng(15);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index d = 1 + trial % 4;
        const auto r = pde_residual(random_payoff(rng, d), random_points(d, 100, 100 + trial));
        worst = std::max(worst, r.max_norm);
    }
    EXPECT_EQ(worst, 0.0);
}

TEST(ResidualProperty, FiniteDifferencesConvergeAtSecondOrder) {
    std::mt19937_64 rng(16);
    const auto p = random_payoff(rng, 2);
    const auto pts = random_points(2, 20, 5);
    const auto fd = pde_residual_fd(as_candidate(p), 2, pts, 1e-4);
    EXPECT_LT(fd.max_norm, 1e-6);
    EXPECT_EQ(fd.mode, DerivativeMode::FiniteDifference);
    EXPECT_EQ(fd.h, 1e-4);
    const auto study = fd_convergence(as_candidate(p), 2, pts);
    EXPECT_NEAR(study.order, 2.0, 0.1);
    EXPECT_GT(study.constant, 0.0);
}

TEST(Residual, FiniteDifferenceMatchesAnalyticForClassic) {
    const ResidualPoint pt{Vector::Constant(1, 0.3), Vector::Constant(1, 0.1), Vector::Constant(1, 2.0)};
    const auto fd = pde_residual_fd(as_candidate(ClassicKind::SquaredLogReturn), 1, {pt});
    EXPECT_NEAR(fd.residuals[0](0, 0), -0.05, 1e-6);
}

TEST(Residual, RejectsNonPositiveLevels) {
    const ResidualPoint pt{Vector::Constant(1, 0.3), Vector::Constant(1, 0.1), Vector::Constant(1, -2.0)};
    EXPECT_THROW(pde_residual(log_variance_payoff(), {ResidualPoint{Vector::Zero(2), Vector::Zero(2), -Vector::Ones(2)}}),
                 std::invalid_argument);
    EXPECT_THROW(pde_residual(ClassicKind::Tau, {pt}), std::invalid_argument);
}

TEST(RandomPoints, RangesAndDeterminism) {
    const auto a = random_points(3, 200, 1);
    const auto b = random_points(3, 200, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].F, b[i].F);
        for (int j = 0; j < 3; ++j) {
            EXPECT_GE(a[i].F[j], 0.5);
            EXPECT_LE(a[i].F[j], 2.0);
            EXPECT_LE(std::abs(a[i].F_hat[j]), 0.5);
            EXPECT_LE(std::abs(a[i].x_hat[j]), 0.3);
        }
    }
}

TEST(Premium, ZeroDriftGivesNoPremium) {
    const auto r = premium_study(log_variance_payoff(), ModelSpec{}, regular_partition(12, 1.0), 50000, 17);
    EXPECT_LT(std::abs(r.premium), 3 * r.premium_se);
    EXPECT_NEAR(r.fair_value, 0.04, 1e-12);
    EXPECT_EQ(r.realised_series.size(), 13u);
    EXPECT_NEAR(r.realised_series.back() + r.implied_series.back(), r.realised.mean - r.fair_value, 1e-12);
}

TEST(Premium, SquaredLogReturnUnderDrift) {
    ModelSpec m;
    m.drift = 0.08;
    const auto r = premium_study(kSquared, m, regular_partition(12, 1.0), 200000, 18);
    EXPECT_EQ(r.method, "paired");
    EXPECT_LT(std::abs(r.premium - 0.08 * (0.08 - 0.04) / 12), 3 * r.premium_se);
}
