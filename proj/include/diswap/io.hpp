#pragma once

#include <string>

namespace diswap {

/// Writes content to a temporary sibling file and renames it over path.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

} // namespace diswap
