#pragma once

// The `comention` command-line tool.
//
//   comention [--strict|--lenient] [--quiet] <subcommand> [flags]
//
// Subcommands: extract, graph, measures, layout, render, bundle, serve.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <ostream>

namespace comention {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace comention
