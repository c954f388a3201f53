#ifndef POSTCLUST_CLI_HPP
#define POSTCLUST_CLI_HPP

#include <string>
#include <vector>

namespace postclust {

// Command-line entry point. Exit codes: 0 success, 1 usage error,
// 2 numerical or data error.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

} // namespace postclust

#endif
