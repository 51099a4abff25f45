#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace bandsing::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kRuntimeError = 2;

/// Runs one command line (without the program name). Errors are written to
/// `err` as lines starting with "error:".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Schema problems of a campaign directory, manifest, JSON-lines file, CSV
/// table, matrix or kernel file. Empty when the file is valid.
std::vector<std::string> check_path(const std::filesystem::path& path);

}  // namespace bandsing::cli
