#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace panelcause::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command. `args` excludes the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace panelcause::cli
