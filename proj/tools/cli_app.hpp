#ifndef ATT_TOOLS_CLI_APP_HPP_
#define ATT_TOOLS_CLI_APP_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace att::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kDataError = 3,
  kDivergence = 4,
};

// Runs the `att` command line. `args` excludes the program name. Data goes
// to files (and, for `predict`/`stats`, to `out`); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace att::cli

#endif  // ATT_TOOLS_CLI_APP_HPP_
