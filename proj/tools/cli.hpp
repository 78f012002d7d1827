// Command-line front end. Exit codes: 0 success, 1 run-level error,
// 2 bad arguments.

#pragma once

#include <iosfwd>

namespace cbh::cli {

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cbh::cli
