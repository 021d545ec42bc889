#include "diswap/hedging.hpp"

#include "batch.hpp"
#include "diswap/model_pricer.hpp"
#include "diswap/stats.hpp"
#include "diswap/swaps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diswap {

namespace {

void check_pair(const DiPayoff& payoff, const MarketState& prev, const MarketState& curr) {
    if (prev.dim() != payoff.dim() || curr.dim() != payoff.dim())
        throw std::invalid_argument("dimension mismatch between pay-off and snapshots");
    if (prev.labels != payoff.labels() || curr.labels != payoff.labels())
        throw std::invalid_argument("pay-off and snapshot labels differ");
}

double needed(double v, const std::string& what) {
    if (std::isnan(v)) throw std::invalid_argument("snapshot has no value for " + what);
    return v;
}

} // namespace

Increment state_increment(const MarketState& prev, const MarketState& curr) {
    if (prev.dim() != curr.dim()) throw std::invalid_argument("state_increment: dimension mismatch");
    return {curr.F - prev.F, curr.x - prev.x};
}

double value_increment(const DiPayoff& payoff, const MarketState& prev, const MarketState& curr) {
    check_pair(payoff, prev, curr);
    const auto d = payoff.dim();
    const auto& omega = payoff.omega();
    const Vector dF = curr.F - prev.F;
    double v = payoff.alpha().dot(dF);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            if (omega(a, b) == 0.0) continue;
            const std::string what = "E[" + payoff.labels()[a] + " * " + payoff.labels()[b] + "]";
            const double dSigma = needed(curr.Sigma(a, b), what) - needed(prev.Sigma(a, b), what);
            v += omega(a, b) * (dSigma - 2.0 * prev.F[a] * dF[b]);
        }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        if (payoff.beta()[j] != 0.0) {
            const std::string what = "ln " + payoff.labels()[j];
            v += payoff.beta()[j] * std::expm1(needed(curr.x[j], what) - needed(prev.x[j], what));
        }
        if (payoff.gamma()[j] != 0.0) {
            const std::string what = "the log contract on " + payoff.labels()[j];
            v += payoff.gamma()[j] * (needed(curr.X[j], what) - needed(prev.X[j], what));
        }
    }
    return v;
}

Decomposition decompose(const DiPayoff& payoff, const MarketState& prev, const MarketState& curr) {
    check_pair(payoff, prev, curr);
    return {payoff.evaluate(state_increment(prev, curr)),
            fair_value(payoff, curr).value - fair_value(payoff, prev).value};
}

HedgeHoldings hedge_holdings(const DiPayoff& payoff, const MarketState& prev) {
    if (prev.dim() != payoff.dim()) throw std::invalid_argument("hedge_holdings: dimension mismatch");
    HedgeHoldings h;
    h.forward_units = payoff.alpha() - 2.0 * payoff.omega() * prev.F;
    for (Eigen::Index j = 0; j < payoff.dim(); ++j) {
        if (payoff.beta()[j] == 0.0) continue;
        if (!(prev.F[j] > 0.0))
            throw std::invalid_argument("hedge_holdings: component '" + prev.labels[j] + "' is not positive");
        h.forward_units[j] += payoff.beta()[j] / prev.F[j];
    }
    h.product_units = payoff.omega();
    h.log_units = payoff.gamma();
    return h;
}

double hedge_increment(const HedgeHoldings& holdings, const MarketState& prev, const MarketState& curr) {
    const auto d = holdings.forward_units.size();
    if (prev.dim() != d || curr.dim() != d) throw std::invalid_argument("hedge_increment: dimension mismatch");
    double v = holdings.forward_units.dot(curr.F - prev.F);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            if (holdings.product_units(a, b) != 0.0)
                v += holdings.product_units(a, b) * (curr.Sigma(a, b) - prev.Sigma(a, b));
    for (Eigen::Index j = 0; j < d; ++j)
        if (holdings.log_units[j] != 0.0) v += holdings.log_units[j] * (curr.X[j] - prev.X[j]);
    return v;
}

double MomentHedge::increment(const std::vector<double>& dX) const {
    if (static_cast<int>(dX.size()) < n) throw std::invalid_argument("MomentHedge: need increments up to order n");
    double v = dX[static_cast<std::size_t>(n - 1)];
    for (int k = 1; k < n; ++k) v -= h[static_cast<std::size_t>(k - 1)] * dX[static_cast<std::size_t>(k - 1)];
    return v;
}

MomentHedge moment_hedge_ratios(int n, double X0, const std::vector<double>& prev_powers) {
    if (n < 2 || n > 4) throw std::invalid_argument("moment_hedge_ratios: n must be 2, 3 or 4");
    if (static_cast<int>(prev_powers.size()) < n - 1)
        throw std::invalid_argument("moment_hedge_ratios: need power log prices up to order n - 1");
    const double X = prev_powers[0];
    MomentHedge m{n, {}};
    switch (n) {
    case 2: m.h = {2.0 * X}; break;
    case 3: m.h = {prev_powers[1] - 4.0 * X0 * X, 2.0 * X0 + X}; break;
    case 4:
        m.h = {prev_powers[2] - 3.0 * X0 * prev_powers[1] + 6.0 * X0 * X0 * X, -3.0 * X0 * X0 - 3.0 * X0 * X,
               3.0 * X0 + X};
        break;
    }
    return m;
}

double straddle_hedge_increment(double P_prev, double C_prev, double P_hat, double C_hat) {
    return -P_prev * C_hat - C_prev * P_hat;
}

double frequency_mtm(const DiPayoff& payoff, const std::vector<Vector>& values_m, const Partition& pm,
                     const Partition& ph, double t) {
    if (values_m.size() != pm.times.size()) throw std::invalid_argument("frequency_mtm: one value vector per time needed");
    const auto coarse = restriction_indices(pm, ph);
    const double tol = 1e-12 * ph.maturity();
    const auto at = std::find_if(ph.times.begin(), ph.times.end(), [&](double s) { return std::abs(s - t) <= tol; });
    if (at == ph.times.end()) throw std::invalid_argument("frequency_mtm: t is not a monitoring time of the coarse partition");
    const std::size_t end_m = coarse[static_cast<std::size_t>(at - ph.times.begin())];
    double fine = 0.0;
    for (std::size_t i = 1; i <= end_m; ++i) fine += payoff.evaluate(Increment::between(values_m[i - 1], values_m[i]));
    double slow = 0.0;
    for (std::size_t i = 1; coarse[i - 1] < end_m; ++i)
        slow += payoff.evaluate(Increment::between(values_m[coarse[i - 1]], values_m[coarse[i]]));
    return fine - slow;
}

std::vector<double> constant_maturity_increments(const Partition& times, const std::vector<double>& near_increments,
                                                 double T_near, const std::vector<double>& far_increments, double T_far,
                                                 double tau) {
    const auto n = times.steps();
    if (near_increments.size() != n || far_increments.size() != n)
        throw std::invalid_argument("constant_maturity_increments: expected one increment per monitoring interval");
    if (!(T_far > T_near)) throw std::invalid_argument("constant_maturity_increments: T_far must exceed T_near");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double target = times.times[i] + tau;
        if (target < T_near - 1e-12 || target > T_far + 1e-12)
            throw std::invalid_argument("constant_maturity_increments: t + tau leaves [T_near, T_far] at t = " +
                                        std::to_string(times.times[i]));
        const double w = (T_far - target) / (T_far - T_near);
        out[i] = w * near_increments[i] + (1.0 - w) * far_increments[i];
    }
    return out;
}

HedgeReport hedge_simulation(const DiPayoff& payoff, const ModelSpec& model, const Partition& partition,
                             std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    if (n_paths < 1) throw std::invalid_argument("hedge_simulation: n_paths must be at least 1");
    const ModelPricer pricer(model, partition.maturity(), payoff.labels());
    const PathSampler sampler(model, partition, seed);
    const auto nt = partition.times.size();

    HedgeReport report;
    report.times = partition;
    report.n_paths = n_paths;
    report.v0 = fair_value(payoff, pricer.state(0.0, model.F0)).value;

    struct Slot {
        std::vector<double> value, realised, implied, increment, residual;
        std::vector<Vector> holdings;
        double step_error = 0.0;
        double terminal_error = 0.0;
    };
    std::vector<RunningStats> value_stats(nt), realised_stats(nt), implied_stats(nt), increment_stats(nt);
    report.residual.assign(nt, 0.0);

    detail::batched_paths<Slot>(
        n_paths, threads,
        [&](std::size_t p, Slot& s) {
            PathSampler::Path path;
            sampler.sample(p, path);
            s.value.assign(nt, 0.0);
            s.realised.assign(nt, 0.0);
            s.implied.assign(nt, 0.0);
            s.increment.assign(nt, 0.0);
            s.residual.assign(nt, 0.0);
            s.holdings.clear();
            s.step_error = 0.0;
            const auto variance = [&](std::size_t i) { return path.v.empty() ? ModelPricer::kNoVariance : path.v[i]; };
            MarketState prev = pricer.state(partition.times[0], path.F[0], variance(0));
            double portfolio = 0.0;
            double realised_sum = 0.0;
            for (std::size_t i = 1; i < nt; ++i) {
                MarketState curr = pricer.state(partition.times[i], path.F[i], variance(i));
                const double dv = value_increment(payoff, prev, curr);
                const auto parts = decompose(payoff, prev, curr);
                const auto holdings = hedge_holdings(payoff, prev);
                const double dh = hedge_increment(holdings, prev, curr);
                if (p == 0) s.holdings.push_back(holdings.forward_units);
                portfolio += dh;
                realised_sum += parts.realised;
                s.increment[i] = dv;
                s.value[i] = s.value[i - 1] + dv;
                s.realised[i] = s.realised[i - 1] + parts.realised;
                s.implied[i] = s.implied[i - 1] + parts.implied;
                s.residual[i] = s.value[i] - portfolio;
                s.step_error = std::max(s.step_error, std::abs(dv - dh));
                prev = std::move(curr);
            }
            s.terminal_error = std::abs(s.value[nt - 1] - (realised_sum - report.v0));
        },
        [&](std::size_t p, const Slot& s) {
            for (std::size_t i = 0; i < nt; ++i) {
                value_stats[i].add(s.value[i]);
                realised_stats[i].add(s.realised[i]);
                implied_stats[i].add(s.implied[i]);
                increment_stats[i].add(s.increment[i]);
                report.residual[i] = std::max(report.residual[i], std::abs(s.residual[i]));
            }
            if (p == 0) report.hedge_positions = s.holdings;
            report.max_step_error = std::max(report.max_step_error, s.step_error);
            report.max_terminal_error = std::max(report.max_terminal_error, s.terminal_error);
        },
        256);

    for (std::size_t i = 0; i < nt; ++i) {
        report.value_path.push_back(value_stats[i].mean);
        report.realised.push_back(realised_stats[i].mean);
        report.implied.push_back(implied_stats[i].mean);
        report.increment_mean.push_back(increment_stats[i].mean);
        report.increment_se.push_back(increment_stats[i].se());
    }
    report.terminal_mean = value_stats[nt - 1].mean;
    report.terminal_sd = value_stats[nt - 1].sd();
    return report;
}

} // namespace diswap
