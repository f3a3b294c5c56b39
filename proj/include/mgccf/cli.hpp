#pragma once

#include <string>
#include <vector>

namespace mgccf {

// Entry point behind the mgccf binary: args excludes argv[0]. Returns the
// process exit code (0 success, 2 configuration/validation errors, 1 other
// failures) and prints a one-line diagnostic on failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace mgccf
