#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jitchrono {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.
int cli_main(int argc, char** argv);

/// Same as above with explicit streams; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jitchrono
