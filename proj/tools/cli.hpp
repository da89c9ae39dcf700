#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace triadkit::cli {

inline constexpr const char* kVersion = "0.3.0";

/// Exit codes: 0 success, 1 validation or runtime error, 2 usage error.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace triadkit::cli
