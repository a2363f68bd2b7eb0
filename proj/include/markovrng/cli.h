#ifndef MARKOVRNG_CLI_H_
#define MARKOVRNG_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace markovrng {

// Exit codes: 0 success, 1 failed verification, 2 validation error,
// 3 infeasible query.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

// "a:b:step" or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace markovrng

#endif  // MARKOVRNG_CLI_H_
