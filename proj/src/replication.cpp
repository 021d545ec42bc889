#include "diswap/replication.hpp"

#include "diswap/claims.hpp"
#include "diswap/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace diswap {

namespace {

void check_black76(double F, double k, double sigma, double tau) {
    if (!(F > 0.0) || !(k > 0.0) || !(sigma > 0.0) || !(tau > 0.0))
        throw std::invalid_argument("black76: F, k, sigma and tau must be positive");
}

double ipow(double y, int p) { return p == 0 ? 1.0 : std::pow(y, p); }

// g(F) = y^p e^{m y} with y = ln F, and its first two derivatives in F.
struct SmoothClaim {
    int p;
    int m;

    double value(double k) const {
        const double y = std::log(k);
        return ipow(y, p) * std::exp(m * y);
    }
    double first(double k) const {
        const double y = std::log(k);
        double bracket = m * ipow(y, p);
        if (p >= 1) bracket += p * ipow(y, p - 1);
        return std::exp((m - 1) * y) * bracket;
    }
    double second(double k) const {
        const double y = std::log(k);
        double bracket = m * (m - 1) * ipow(y, p);
        if (p >= 1) bracket += (2 * m - 1) * p * ipow(y, p - 1);
        if (p >= 2) bracket += p * (p - 1) * ipow(y, p - 2);
        return std::exp((m - 2) * y) * bracket;
    }
};

template <class Second>
double strike_integral(const OptionChain& chain, double separation, Second&& second) {
    const auto w = strike_weights(chain.strikes);
    double total = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) total += w[i] * second(chain.strikes[i]) * chain.otm(i, separation);
    return total;
}

std::size_t find_strike(const OptionChain& chain, double k, const std::string& label) {
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (std::abs(chain.strikes[i] - k) <= 1e-12 * k) return i;
    throw std::invalid_argument("chain has no strike for instrument '" + label + "'");
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

double black76_call(double F, double k, double sigma, double tau) {
    check_black76(F, k, sigma, tau);
    const double s = sigma * std::sqrt(tau);
    const double d1 = (std::log(F / k) + 0.5 * s * s) / s;
    return F * normal_cdf(d1) - k * normal_cdf(d1 - s);
}

double black76_put(double F, double k, double sigma, double tau) {
    check_black76(F, k, sigma, tau);
    const double s = sigma * std::sqrt(tau);
    const double d1 = (std::log(F / k) + 0.5 * s * s) / s;
    return k * normal_cdf(s - d1) - F * normal_cdf(-d1);
}

double black76(double F, double k, double sigma, double tau, bool is_call) {
    return is_call ? black76_call(F, k, sigma, tau) : black76_put(F, k, sigma, tau);
}

void OptionChain::validate() const {
    if (!(F > 0.0) || !std::isfinite(F)) throw std::invalid_argument("chain: forward must be positive");
    if (!(T_remaining > 0.0)) throw std::invalid_argument("chain: time to maturity must be positive");
    if (strikes.size() < 2) throw std::invalid_argument("chain: need at least two strikes");
    if (puts.size() != strikes.size() || calls.size() != strikes.size())
        throw std::invalid_argument("chain: strike, put and call columns differ in length");
    for (std::size_t i = 0; i < strikes.size(); ++i) {
        const double k = strikes[i];
        if (!(k > 0.0)) throw std::invalid_argument("chain: strikes must be positive");
        if (i > 0 && !(k > strikes[i - 1])) throw std::invalid_argument("chain: strikes must be strictly ascending");
        const double tol = 1e-9 * std::max(F, k);
        if (!std::isfinite(puts[i]) || !std::isfinite(calls[i]))
            throw std::invalid_argument("chain: non-finite price at strike " + format_double(k));
        if (calls[i] < std::max(F - k, 0.0) - tol || calls[i] > F + tol)
            throw std::invalid_argument("chain: call price out of bounds at strike " + format_double(k));
        if (puts[i] < std::max(k - F, 0.0) - tol || puts[i] > k + tol)
            throw std::invalid_argument("chain: put price out of bounds at strike " + format_double(k));
    }
}

std::vector<double> StrikeGrid::strikes() const {
    if (n_strikes < 2) throw std::invalid_argument("strike grid needs at least two strikes");
    std::vector<double> k(static_cast<std::size_t>(n_strikes));
    const double a = std::log(k_min);
    const double b = std::log(k_max);
    for (int i = 0; i < n_strikes; ++i) k[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n_strikes - 1));
    k.front() = k_min;
    k.back() = k_max;
    return k;
}

StrikeGrid default_grid(double F0, double sigma, double T, int n_strikes, double width) {
    if (!(F0 > 0.0) || !(sigma > 0.0) || !(T > 0.0)) throw std::invalid_argument("default_grid: F0, sigma and T must be positive");
    if (!(width > 0.0)) throw std::invalid_argument("default_grid: width must be positive");
    if (n_strikes < 16) throw std::invalid_argument("default_grid: need at least 16 strikes");
    const double half = width * sigma * std::sqrt(T);
    return {F0 * std::exp(-half), F0 * std::exp(half), n_strikes};
}

OptionChain black76_chain(double F, double sigma, double tau, const std::vector<double>& strikes) {
    OptionChain chain;
    chain.F = F;
    chain.T_remaining = tau;
    chain.strikes = strikes;
    for (double k : strikes) {
        chain.puts.push_back(black76_put(F, k, sigma, tau));
        chain.calls.push_back(black76_call(F, k, sigma, tau));
    }
    chain.validate();
    return chain;
}

double cm_weight(int n, double k) {
    if (n < 1) throw std::invalid_argument("cm_weight: n must be at least 1");
    if (!(k > 0.0)) throw std::invalid_argument("cm_weight: strike must be positive");
    if (n == 1) return -1.0 / (k * k);
    const double y = std::log(k);
    return n * ipow(y, n - 2) * (n - 1 - y) / (k * k);
}

std::vector<double> strike_weights(const std::vector<double>& strikes) {
    const auto n = strikes.size();
    std::vector<double> w(n, 0.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = std::log(strikes[i == 0 ? 0 : i - 1]);
        const double hi = std::log(strikes[i + 1 == n ? n - 1 : i + 1]);
        w[i] = strikes[i] * 0.5 * (hi - lo);
    }
    return w;
}

double power_log_price(const OptionChain& chain, int n, double x_t, std::optional<double> separation) {
    chain.validate();
    if (n < 1) throw std::invalid_argument("power_log_price: n must be at least 1");
    if (std::abs(x_t - std::log(chain.F)) > 1e-9 * std::max(1.0, std::abs(x_t)))
        throw std::invalid_argument("power_log_price: x_t must equal ln F of the chain");
    const double a = separation.value_or(chain.F);
    if (!(a > 0.0)) throw std::invalid_argument("power_log_price: separation strike must be positive");
    const double head = separation ? std::pow(std::log(a), n) + n * ipow(std::log(a), n - 1) / a * (chain.F - a)
                                   : std::pow(x_t, n);
    return head + strike_integral(chain, a, [n](double k) { return cm_weight(n, k); });
}

double chain_expectation(const OptionChain& chain, int power, int expo) {
    chain.validate();
    if (power < 0) throw std::invalid_argument("chain_expectation: power must be non-negative");
    const SmoothClaim g{power, expo};
    return g.value(chain.F) + strike_integral(chain, chain.F, [&g](double k) { return g.second(k); });
}

double BuyAndHold::value(const OptionChain& chain) const {
    if (chain.strikes.size() != strikes.size()) throw std::invalid_argument("buy-and-hold: chain strikes differ");
    double v = constant + forward_units * (chain.F - forward_reference);
    for (std::size_t i = 0; i < strikes.size(); ++i) {
        if (std::abs(chain.strikes[i] - strikes[i]) > 1e-12 * strikes[i])
            throw std::invalid_argument("buy-and-hold: chain strikes differ");
        v += put_weights[i] * chain.puts[i] + call_weights[i] * chain.calls[i];
    }
    return v;
}

BuyAndHold buy_and_hold_portfolio(int n, const OptionChain& chain0) {
    chain0.validate();
    if (n < 1) throw std::invalid_argument("buy_and_hold_portfolio: n must be at least 1");
    BuyAndHold bh;
    bh.n = n;
    const double x0 = std::log(chain0.F);
    bh.constant = std::pow(x0, n);
    bh.forward_units = n * ipow(x0, n - 1) / chain0.F;
    bh.forward_reference = chain0.F;
    bh.strikes = chain0.strikes;
    const auto w = strike_weights(chain0.strikes);
    bh.put_weights.assign(chain0.size(), 0.0);
    bh.call_weights.assign(chain0.size(), 0.0);
    for (std::size_t i = 0; i < chain0.size(); ++i) {
        const double weight = w[i] * cm_weight(n, chain0.strikes[i]);
        if (chain0.strikes[i] <= chain0.F) bh.put_weights[i] = weight;
        else bh.call_weights[i] = weight;
    }
    return bh;
}

OptionChain read_chain_csv(const std::string& path, double T_remaining, std::optional<double> F) {
    std::istringstream in(read_file(path));
    OptionChain chain;
    chain.T_remaining = T_remaining;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.find_first_of("0123456789") == std::string::npos) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                cells.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": malformed number '" + cell + "'");
            }
        }
        if (cells.size() != 3)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected strike,put,call");
        chain.strikes.push_back(cells[0]);
        chain.puts.push_back(cells[1]);
        chain.calls.push_back(cells[2]);
    }
    if (F) {
        chain.F = *F;
    } else {
        std::vector<double> implied;
        for (std::size_t i = 0; i < chain.size(); ++i) implied.push_back(chain.strikes[i] + chain.calls[i] - chain.puts[i]);
        if (implied.empty()) throw std::invalid_argument(path + ": chain is empty");
        chain.F = median(implied);
    }
    chain.validate();
    return chain;
}

std::string chain_csv(const OptionChain& chain) {
    std::string out = "strike,put,call\n";
    for (std::size_t i = 0; i < chain.size(); ++i)
        out += format_double(chain.strikes[i]) + "," + format_double(chain.puts[i]) + "," + format_double(chain.calls[i]) + "\n";
    return out;
}

MarketState chain_state(const OptionChain& chain, const std::vector<std::string>& labels) {
    chain.validate();
    const auto d = static_cast<Eigen::Index>(labels.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(chain.F);

    // Each label is the forward (power 0, expo 1), a power log (power n, expo 0) or a vanilla.
    struct Parsed {
        int power = 0;
        int expo = 0;
        bool vanilla = false;
        bool call = false;
        double strike = 0.0;
    };
    std::vector<Parsed> parsed;
    Vector F(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto& label = labels[static_cast<std::size_t>(j)];
        const TerminalClaim claim = TerminalClaim::from_label(label);
        Parsed p;
        if (claim.vanilla()) {
            p.vanilla = true;
            p.call = claim.vanilla()->type == VanillaType::Call;
            p.strike = claim.vanilla()->strike;
            const auto i = find_strike(chain, p.strike, label);
            F[j] = p.call ? chain.calls[i] : chain.puts[i];
        } else {
            const auto& term = claim.pieces().front().terms.front();
            p.power = term.power;
            p.expo = term.expo;
            F[j] = p.expo == 1 ? chain.F : power_log_price(chain, p.power, x);
        }
        parsed.push_back(p);
    }

    Matrix Sigma = Matrix::Constant(d, d, nan);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = a; b < d; ++b) {
            const auto& pa = parsed[static_cast<std::size_t>(a)];
            const auto& pb = parsed[static_cast<std::size_t>(b)];
            double v = nan;
            if (pa.vanilla || pb.vanilla) {
                if (pa.vanilla && pb.vanilla && pa.call != pb.call) {
                    const double put_k = pa.call ? pb.strike : pa.strike;
                    const double call_k = pa.call ? pa.strike : pb.strike;
                    if (put_k <= call_k * (1.0 + 1e-12)) v = 0.0;
                }
            } else if (pa.expo + pb.expo == 0) {
                v = power_log_price(chain, pa.power + pb.power, x);
            } else {
                v = chain_expectation(chain, pa.power + pb.power, pa.expo + pb.expo);
            }
            Sigma(a, b) = v;
            Sigma(b, a) = v;
        }
    }

    Vector X = Vector::Constant(d, nan);
    for (Eigen::Index j = 0; j < d; ++j)
        if (!parsed[static_cast<std::size_t>(j)].vanilla && parsed[static_cast<std::size_t>(j)].expo == 1)
            X[j] = power_log_price(chain, 1, x);
    return MarketState(labels, F, Sigma, X);
}

} // namespace diswap
