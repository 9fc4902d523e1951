// Command-line entry point: gen, stats, train, eval, sweep, grad-check.
//
// Exit codes: 0 success, 1 usage error, 2 data or configuration error,
// 3 numeric failure (including a failed gradient check).

#pragma once

#include <iosfwd>

namespace dwellrec::cli {

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace dwellrec::cli
