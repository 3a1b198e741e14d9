#pragma once

#include <iosfwd>

namespace bikeflow::cli {

// Exit codes: 0 success, 1 infeasible or refused, 2 usage or validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand: build-graph, gen, solve, simulate, export or bench.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bikeflow::cli
