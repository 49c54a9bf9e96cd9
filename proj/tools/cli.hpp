#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bridgesim {

// Entry point of the bridgesim tool. args excludes the program name.
// Exit status: 0 ok, 1 the command ran but found a problem, 2 bad input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bridgesim
