#pragma once

#include <string>
#include <vector>

namespace diswap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerificationFailed = 2;

/// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

} // namespace diswap::cli
