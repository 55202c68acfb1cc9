#ifndef MDM_CLI_HPP
#define MDM_CLI_HPP

#include <ostream>

namespace mdm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kValidation = 3,
  kNumerical = 4,
  kIo = 5,
};

/// Entry point of the `mdm` executable: identify, simulate, benchmark,
/// identifiability.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdm::cli

#endif  // MDM_CLI_HPP
