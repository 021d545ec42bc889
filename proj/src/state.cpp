#include "diswap/state.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace diswap {

MarketState::MarketState(std::vector<std::string> labels_in, Vector F_in, Matrix Sigma_in, Vector X_in)
    : labels(std::move(labels_in)), F(std::move(F_in)), Sigma(std::move(Sigma_in)), X(std::move(X_in)) {
    const auto d = F.size();
    if (d < 1) throw std::invalid_argument("MarketState: empty state");
    if (static_cast<Eigen::Index>(labels.size()) != d || Sigma.rows() != d || Sigma.cols() != d || X.size() != d)
        throw std::invalid_argument("MarketState: component dimensions disagree");
    if (!F.allFinite()) throw std::invalid_argument("MarketState: F must be finite");

    double scale = 1.0;
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            if (std::isfinite(Sigma(a, b))) scale = std::max(scale, std::abs(Sigma(a, b)));
    const double tol = kPsdTolerance * scale;

    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = a + 1; b < d; ++b) {
            const double ab = Sigma(a, b);
            const double ba = Sigma(b, a);
            if (std::isnan(ab) != std::isnan(ba) || (!std::isnan(ab) && std::abs(ab - ba) > tol))
                throw std::invalid_argument("MarketState: Sigma is not symmetric");
            if (!std::isnan(ab)) Sigma(a, b) = Sigma(b, a) = 0.5 * (ab + ba);
        }
    }

    std::vector<Eigen::Index> known;
    for (Eigen::Index a = 0; a < d; ++a)
        if (Sigma.row(a).allFinite()) known.push_back(a);
    if (!known.empty()) {
        const auto k = static_cast<Eigen::Index>(known.size());
        Matrix cov(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                cov(i, j) = Sigma(known[i], known[j]) - F[known[i]] * F[known[j]];
        Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -tol)
            throw std::invalid_argument("MarketState: Sigma - F F' is not positive semi-definite");
    }

    x.resize(d);
    for (Eigen::Index j = 0; j < d; ++j)
        x[j] = F[j] > 0.0 ? std::log(F[j]) : std::numeric_limits<double>::quiet_NaN();
}

MarketState MarketState::terminal(std::vector<std::string> labels, const Vector& F) {
    MarketState s;
    s.labels = std::move(labels);
    s.F = F;
    s.Sigma = F * F.transpose();
    s.x.resize(F.size());
    for (Eigen::Index j = 0; j < F.size(); ++j)
        s.x[j] = F[j] > 0.0 ? std::log(F[j]) : std::numeric_limits<double>::quiet_NaN();
    s.X = s.x;
    if (static_cast<Eigen::Index>(s.labels.size()) != F.size())
        throw std::invalid_argument("MarketState: component dimensions disagree");
    return s;
}

} // namespace diswap
