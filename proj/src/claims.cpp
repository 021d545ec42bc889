#include "diswap/claims.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace diswap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxPower = 32;

double parse_number(const std::string& text, const std::string& label) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("unrecognised instrument label '" + label + "'");
    return value;
}

// x^j * pdf(x), zero at infinite x.
double tail_term(double x, int j) {
    if (std::isinf(x)) return 0.0;
    return std::pow(x, j) * normal_pdf(x);
}

void add_term(std::vector<ClaimTerm>& terms, ClaimTerm t) {
    for (auto& existing : terms) {
        if (existing.power == t.power && existing.expo == t.expo) {
            existing.coef += t.coef;
            return;
        }
    }
    terms.push_back(t);
}

} // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

TerminalClaim::TerminalClaim(std::vector<ClaimPiece> pieces) {
    for (auto& p : pieces) {
        if (!(p.lo < p.hi)) continue;
        std::vector<ClaimTerm> kept;
        for (const auto& t : p.terms) {
            if (t.power < 0 || t.power > kMaxPower) throw std::invalid_argument("TerminalClaim: power out of range");
            if (t.coef != 0.0) add_term(kept, t);
        }
        std::erase_if(kept, [](const ClaimTerm& t) { return t.coef == 0.0; });
        if (!kept.empty()) pieces_.push_back({p.lo, p.hi, std::move(kept)});
    }
    std::sort(pieces_.begin(), pieces_.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
}

TerminalClaim TerminalClaim::forward() { return TerminalClaim({{-kInf, kInf, {{1.0, 0, 1}}}}); }

TerminalClaim TerminalClaim::power_log(int n) {
    if (n < 1) throw std::invalid_argument("power_log: order must be at least 1");
    return TerminalClaim({{-kInf, kInf, {{1.0, n, 0}}}});
}

TerminalClaim TerminalClaim::put(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("put: strike must be positive");
    TerminalClaim c({{-kInf, std::log(strike), {{strike, 0, 0}, {-1.0, 0, 1}}}});
    c.vanilla_ = VanillaTag{VanillaType::Put, strike};
    return c;
}

TerminalClaim TerminalClaim::call(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("call: strike must be positive");
    TerminalClaim c({{std::log(strike), kInf, {{1.0, 0, 1}, {-strike, 0, 0}}}});
    c.vanilla_ = VanillaTag{VanillaType::Call, strike};
    return c;
}

TerminalClaim TerminalClaim::from_label(const std::string& label) {
    if (label == "F") return forward();
    if (label == "X") return power_log(1);
    if (label.size() > 1 && label[0] == 'X') {
        const double n = parse_number(label.substr(1), label);
        if (n != std::floor(n) || n < 1 || n > kMaxPower)
            throw std::invalid_argument("unrecognised instrument label '" + label + "'");
        return power_log(static_cast<int>(n));
    }
    if (label.size() > 2 && label[1] == '@') {
        const double k = parse_number(label.substr(2), label);
        if (label[0] == 'P') return put(k);
        if (label[0] == 'C') return call(k);
    }
    throw std::invalid_argument("unrecognised instrument label '" + label + "'");
}

bool TerminalClaim::is_smooth() const {
    return pieces_.size() == 1 && std::isinf(pieces_[0].lo) && std::isinf(pieces_[0].hi);
}

double TerminalClaim::evaluate(double y) const {
    for (const auto& p : pieces_) {
        if (y >= p.lo && (y < p.hi || (std::isinf(p.hi) && y <= p.hi))) {
            double v = 0.0;
            for (const auto& t : p.terms) {
                double term = t.coef;
                if (t.power != 0) term *= std::pow(y, t.power);
                if (t.expo != 0) term *= std::exp(t.expo * y);
                v += term;
            }
            return v;
        }
    }
    return 0.0;
}

TerminalClaim operator*(const TerminalClaim& a, const TerminalClaim& b) {
    std::vector<ClaimPiece> out;
    for (const auto& pa : a.pieces_) {
        for (const auto& pb : b.pieces_) {
            const double lo = std::max(pa.lo, pb.lo);
            const double hi = std::min(pa.hi, pb.hi);
            if (!(lo < hi)) continue;
            std::vector<ClaimTerm> terms;
            for (const auto& ta : pa.terms)
                for (const auto& tb : pb.terms)
                    add_term(terms, {ta.coef * tb.coef, ta.power + tb.power, ta.expo + tb.expo});
            out.push_back({lo, hi, std::move(terms)});
        }
    }
    return TerminalClaim(std::move(out));
}

double normal_raw_moment(int k, double mean, double var) {
    return truncated_normal_moment(k, mean, var, -kInf, kInf);
}

double truncated_normal_moment(int k, double mean, double var, double a, double b) {
    if (k < 0 || k > kMaxPower) throw std::invalid_argument("truncated_normal_moment: order out of range");
    if (!(var > 0.0)) throw std::invalid_argument("truncated_normal_moment: variance must be positive");
    if (!(a < b)) return 0.0;
    const double s = std::sqrt(var);
    const double alpha = (a - mean) / s;
    const double beta = (b - mean) / s;

    // I_j = E[Z^j 1{alpha < Z < beta}] for standard normal Z.
    std::array<double, kMaxPower + 1> I{};
    if (std::isinf(alpha) && std::isinf(beta)) {
        I[0] = 1.0;
    } else if (alpha >= 0.0) {
        I[0] = 0.5 * std::erfc(alpha / std::numbers::sqrt2) - 0.5 * std::erfc(beta / std::numbers::sqrt2);
    } else if (beta <= 0.0) {
        I[0] = normal_cdf(beta) - normal_cdf(alpha);
    } else {
        I[0] = 1.0 - normal_cdf(alpha) - 0.5 * std::erfc(beta / std::numbers::sqrt2);
    }
    if (k >= 1) I[1] = tail_term(alpha, 0) - tail_term(beta, 0);
    for (int j = 2; j <= k; ++j)
        I[static_cast<std::size_t>(j)] =
            (j - 1) * I[static_cast<std::size_t>(j - 2)] + tail_term(alpha, j - 1) - tail_term(beta, j - 1);

    // E[(mean + s Z)^k ...] by binomial expansion.
    double result = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
        if (j > 0) binom = binom * (k - j + 1) / j;
        result += binom * std::pow(mean, k - j) * std::pow(s, j) * I[static_cast<std::size_t>(j)];
    }
    return result;
}

double gaussian_expectation(const TerminalClaim& claim, double mean, double var) {
    if (var < 0.0) throw std::invalid_argument("gaussian_expectation: negative variance");
    if (var == 0.0) return claim.evaluate(mean);
    double total = 0.0;
    for (const auto& p : claim.pieces()) {
        for (const auto& t : p.terms) {
            // E[Y^k e^{mY} 1{.}] = e^{m mu + m^2 v / 2} E[W^k 1{.}], W ~ N(mu + m v, v).
            const double m = t.expo;
            const double tilt = m == 0.0 ? 1.0 : std::exp(m * mean + 0.5 * m * m * var);
            total += t.coef * tilt * truncated_normal_moment(t.power, mean + m * var, var, p.lo, p.hi);
        }
    }
    return total;
}

} // namespace diswap
