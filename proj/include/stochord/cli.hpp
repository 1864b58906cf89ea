#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Command-line front end of the `stochord` tool.
//
// Exit status: 0 Holds (or success), 1 Refuted, 2 Unknown, 64 usage error,
// 65 malformed input file, 70 numeric failure.
namespace stochord::cli {

inline constexpr int kExitHolds = 0;
inline constexpr int kExitRefuted = 1;
inline constexpr int kExitUnknown = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDataErr = 65;
inline constexpr int kExitSoftware = 70;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stochord::cli
