#pragma once

#include <iosfwd>

namespace kvf {

// argv-style entry point, testable in-process. Output reports go to `out`,
// diagnostics to `err`. Returns the process exit code: 0 when every
// requested check passed its tolerance, 1 when a check failed, 2 on usage or
// input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kvf
