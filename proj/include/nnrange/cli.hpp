#pragma once

#include <iosfwd>

namespace nnrange {

/// Exit codes: 0 success, 1 analysis finished without a tight result, 2 bad input.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nnrange
