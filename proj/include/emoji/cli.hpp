#pragma once

#include <istream>
#include <ostream>

namespace emoji {

/// Runs the `emoji` command line. Returns 0 on success, 1 on user error
/// (bad flags, bad input files, invalid configuration), 2 on internal error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// As above, reading interactive confirmations from `in`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace emoji
