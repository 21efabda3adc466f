#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ef::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;       ///< validation or I/O failure
inline constexpr int kExitAssessment = 2;  ///< IID verdict false, restart failure or health alarm
inline constexpr int kExitUsage = 64;

/// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ef::cli
