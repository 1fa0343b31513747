#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pathsql {

// `args` excludes the program name. Returns the process exit status: 0 on
// success, 1 with a one-line "error: phase=... kind=... msg=..." on failure,
// 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pathsql
