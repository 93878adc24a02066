#ifndef XSCREEN_CLI_HPP
#define XSCREEN_CLI_HPP

#include <string>
#include <vector>

namespace xscreen::cli {

/// Exit codes: 0 success (including empty findings), 2 usage error,
/// 3 data/schema error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace xscreen::cli

#endif  // XSCREEN_CLI_HPP
