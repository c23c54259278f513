// Command-line front end. run_cli is the whole program minus process setup,
// so tests can drive it with in-memory streams.
//
// Exit codes: 0 success, 1 solver/generation failure or failed verification,
// 2 bad flags, unreadable input or malformed config.

#pragma once

#include <iosfwd>

namespace covalign::cli {

inline constexpr const char* kVersion = "0.1.0";

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace covalign::cli
