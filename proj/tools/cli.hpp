#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jamguard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitTraining = 3;

inline constexpr unsigned long long kDefaultSeed = 42;

/// Runs one command line (args excludes the program name) and returns the
/// process exit code. Nothing is written to std::cout/std::cerr directly.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace jamguard::cli
