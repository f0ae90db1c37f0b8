#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "factorlab/error.hpp"

namespace factorlab {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUserInput = 2;
inline constexpr int kExitData = 3;

int exit_code_for(ErrorKind kind);

/// Runs the command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace factorlab
