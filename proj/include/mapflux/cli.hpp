#pragma once

#include <string>
#include <vector>

namespace mapflux::cli {

/// Exit codes of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kNumerical = 2;
inline constexpr int kVerificationFailed = 3;

/// Runs one subcommand; args[0] is the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace mapflux::cli
