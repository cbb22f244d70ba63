#pragma once

#include <iosfwd>

namespace romkit::cli {

// Runs the romkit command line. Exit codes: 0 success, 1 validation checks
// failed, 2 configuration error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace romkit::cli
