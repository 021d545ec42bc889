#pragma once

// European claims on a single forward, written as piecewise exp-polynomials in
// the terminal log price y = ln F_T:
//
//   g(y) = sum_terms coef * y^power * exp(expo * y)    on each piece [lo, hi)
//
// The forward (e^y), power log contracts (y^n), vanilla puts and calls and all
// their pairwise products stay in this family, and every member has a closed
// form expectation under a Gaussian log price. That is what the analytic
// market states (E_t[F_T], E_t[F_T F_T'], E_t[x_T]) are built from.

#include <optional>
#include <string>
#include <vector>

namespace diswap {

struct ClaimTerm {
    double coef = 0.0;
    int power = 0;
    int expo = 0;
};

struct ClaimPiece {
    double lo;  // may be -inf
    double hi;  // may be +inf
    std::vector<ClaimTerm> terms;
};

enum class VanillaType { Put, Call };

struct VanillaTag {
    VanillaType type;
    double strike;
};

class TerminalClaim {
public:
    TerminalClaim() = default;
    explicit TerminalClaim(std::vector<ClaimPiece> pieces);

    static TerminalClaim forward();
    static TerminalClaim power_log(int n);
    static TerminalClaim put(double strike);
    static TerminalClaim call(double strike);

    /// Claim named by an instrument label: "F", "X", "X<n>", "P@<k>", "C@<k>".
    static TerminalClaim from_label(const std::string& label);

    const std::vector<ClaimPiece>& pieces() const { return pieces_; }
    const std::optional<VanillaTag>& vanilla() const { return vanilla_; }

    /// Identically zero (no pieces survive).
    bool is_zero() const { return pieces_.empty(); }
    /// A single piece covering the whole real line.
    bool is_smooth() const;

    double evaluate(double y) const;

    friend TerminalClaim operator*(const TerminalClaim& a, const TerminalClaim& b);

private:
    std::vector<ClaimPiece> pieces_;
    std::optional<VanillaTag> vanilla_;
};

/// E[g(Y)] for Y ~ N(mean, var). var = 0 evaluates g at the mean.
double gaussian_expectation(const TerminalClaim& claim, double mean, double var);

/// E[Y^k 1{a < Y < b}] for Y ~ N(mean, var), var > 0.
double truncated_normal_moment(int k, double mean, double var, double a, double b);

/// Raw moment E[Y^k] for Y ~ N(mean, var).
double normal_raw_moment(int k, double mean, double var);

double normal_cdf(double x);
double normal_pdf(double x);

} // namespace diswap
