#pragma once

#include <iosfwd>

namespace tailcp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitParse = 3,
  kExitDomain = 4,
  kExitIo = 5,
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tailcp::cli
