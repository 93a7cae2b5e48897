#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wnn {

// Full command-line surface, in-process. args excludes the program name.
// Returns 0 on success, 1 on a domain error (message on err), 2 on a usage
// error. All commands are deterministic given their flags and seeds.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace wnn
