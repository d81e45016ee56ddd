#pragma once

#include <string>
#include <vector>

namespace sensauth::cli {

// Runs one CLI invocation. Exit codes: 0 success, 1 validation or assertion
// failure, 2 usage error.
int run(const std::vector<std::string>& args);

}  // namespace sensauth::cli
