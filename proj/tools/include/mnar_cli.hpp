#pragma once

#include <iosfwd>

namespace mnar::cli {

/// Runs the mnarfit command line. Returns the process exit status:
/// 0 success, 2 boundary fit, 1 error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mnar::cli
