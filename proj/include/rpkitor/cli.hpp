#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rpkitor::cli {

// args[0] is the program name. CSV goes to the -o file, or to `out` when -o is absent
// or "-"; diagnostics go to `err`. Returns 0 on success, 1 on bad input, 2 otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace rpkitor::cli
