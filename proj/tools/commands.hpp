#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace upk::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

// args[0] is the program name. Never throws; every failure maps to an exit
// code with a message on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace upk::cli
