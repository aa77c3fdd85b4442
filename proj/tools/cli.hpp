#pragma once

#include <ostream>

namespace comclip {

// Entry point of the comclip command line tool. Returns the process exit code:
// 0 success, 1 usage error, 2 data error, 3 backend error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace comclip
