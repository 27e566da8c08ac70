#ifndef OPO_CLI_HPP
#define OPO_CLI_HPP

#include <iosfwd>

namespace opo::cli {

/// Process exit codes.
enum ExitCode : int {
  success = 0,
  check_failed = 1,
  validation_error = 2,
  infeasible = 3,
  oracle_assertion = 4,
};

/// Entry point of the `opo-squeeze` tool; reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opo::cli

#endif  // OPO_CLI_HPP
