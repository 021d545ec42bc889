#pragma once

// JSON pay-off descriptions:
//   {"dim": 2, "labels": ["F", "X"], "alpha": [...], "omega": [[...]], "beta": [...], "gamma": [...]}
//   {"moment": {"n": 3, "X0": -0.02}}          X0 may be omitted and taken from the market
//   {"straddle": {"strikes": [100], "omega_tilde": [[1]]}}
//   {"lv": {}}                                  log variance over (F, X)
//   {"classic": "SquaredLogReturn"}

#include "diswap/verify.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>

namespace diswap {

struct PayoffSpec {
    enum class Kind { Full, Moment, Straddle, LogVariance, Classic };
    Kind kind = Kind::Full;
    std::optional<DiPayoff> payoff;       // Full, Straddle, LogVariance
    std::optional<ClassicPayoff> classic;
    int moment_n = 0;
    std::optional<double> moment_X0;

    /// Instruments the pay-off is written over (known before X0 is resolved).
    std::vector<std::string> labels() const;
    /// Builds the pay-off. X0 is called only for a moment swap without an explicit X0.
    Characteristic resolve(const std::function<double()>& X0) const;
};

/// Throws std::invalid_argument naming the offending key.
PayoffSpec parse_payoff(const nlohmann::json& j);
/// Reads a file when text names one, otherwise parses text as inline JSON.
PayoffSpec load_payoff(const std::string& file_or_json);

nlohmann::json to_json(const DiPayoff& payoff);

} // namespace diswap
