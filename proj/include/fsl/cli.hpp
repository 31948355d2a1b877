#ifndef FSL_CLI_HPP
#define FSL_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fsl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one subcommand. `args` includes the program name. Errors are written
/// to `err` as a single line `fsl: error[<kind>]: <message>`, followed by the
/// usage text for usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsl::cli

#endif  // FSL_CLI_HPP
