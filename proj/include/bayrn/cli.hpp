#ifndef BAYRN_CLI_HPP
#define BAYRN_CLI_HPP

#include <string>
#include <vector>

namespace bayrn {

// Exit codes: 0 success, 2 bad usage/config, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// Entry point behind the bayrntune binary; args exclude argv[0].
int run_cli(const std::vector<std::string>& args);

}  // namespace bayrn

#endif  // BAYRN_CLI_HPP
