#pragma once

#include <iosfwd>

namespace bayesdr {

/// Runs the command line. Writes exactly one JSON document to `out` for
/// every subcommand except simulate; errors go to `err` as JSON. Returns the
/// process exit code (0 ok, 2 config, 3 data, 4 numeric, 1 other).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bayesdr
